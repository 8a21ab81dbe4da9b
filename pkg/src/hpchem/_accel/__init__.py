"""Backend selection for the per-mode propagator application.

The damped-wave block propagator is applied to every Fourier mode twice per
time step; that loop dominates solver runtime on fine grids.  A compiled
Cython kernel is used when the extension built, otherwise a NumPy fallback
with identical semantics.  ``benchmarks/bench_backends.py`` compares the two.
"""

from __future__ import annotations

import numpy as np

from ._numpy import apply_propagator_numpy

try:
    from ._core import apply_propagator_flat as _compiled_flat

    HAVE_COMPILED = True
except ImportError:  # pragma: no cover - depends on build environment
    _compiled_flat = None
    HAVE_COMPILED = False

__all__ = [
    "HAVE_COMPILED",
    "backend_name",
    "apply_propagator",
    "apply_propagator_numpy",
    "apply_propagator_compiled",
]


def backend_name() -> str:
    return "compiled" if HAVE_COMPILED else "numpy"


def apply_propagator_compiled(
    w_hat: np.ndarray,
    khat: np.ndarray,
    e11: np.ndarray,
    e22: np.ndarray,
    e12_im: np.ndarray,
    etr: float,
) -> np.ndarray:
    """Compiled kernel on flattened views; raises if the extension is absent."""
    if _compiled_flat is None:
        raise RuntimeError("compiled accelerator extension is not available")
    ncomp = w_hat.shape[0]
    ndirs = khat.shape[0]
    out = np.ascontiguousarray(w_hat)
    _compiled_flat(
        out.reshape(ncomp, -1),
        np.ascontiguousarray(khat, dtype=np.float64).reshape(ndirs, -1),
        np.ascontiguousarray(e11, dtype=np.float64).reshape(-1),
        np.ascontiguousarray(e22, dtype=np.float64).reshape(-1),
        np.ascontiguousarray(e12_im, dtype=np.float64).reshape(-1),
        float(etr),
    )
    return out


def apply_propagator(
    w_hat: np.ndarray,
    khat: np.ndarray,
    e11: np.ndarray,
    e22: np.ndarray,
    e12_im: np.ndarray,
    etr: float,
) -> np.ndarray:
    """Apply the block propagator to spectral data ``w_hat``.

    ``w_hat`` has shape (dim+1, *spectral_shape), conserved component first;
    ``khat`` the unit wavevector components, shape (dim, *spectral_shape);
    ``e11``/``e22``/``e12_im`` the real block entries per mode and ``etr`` the
    transverse damping factor exp(-beta*t).  Returns the propagated array
    (the input may be overwritten).
    """
    if HAVE_COMPILED:
        return apply_propagator_compiled(w_hat, khat, e11, e22, e12_im, etr)
    return apply_propagator_numpy(w_hat, khat, e11, e22, e12_im, etr)
