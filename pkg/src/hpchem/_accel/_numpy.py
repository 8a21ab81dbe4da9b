"""NumPy implementation of the per-mode propagator application."""

from __future__ import annotations

import numpy as np


def apply_propagator_numpy(
    w_hat: np.ndarray,
    khat: np.ndarray,
    e11: np.ndarray,
    e22: np.ndarray,
    e12_im: np.ndarray,
    etr: float,
) -> np.ndarray:
    """Vectorized equivalent of the compiled kernel.

    Per mode: the conserved component and the longitudinal part of the
    dissipative block are mixed by the 2x2 entries (e11, i*e12_im; i*e12_im,
    e22); the transverse part is multiplied by ``etr``.
    """
    ndirs = khat.shape[0]
    u = w_hat[0]
    p = np.zeros_like(u)
    for j in range(ndirs):
        p += khat[j] * w_hat[1 + j]
    coupling = 1j * e12_im
    new_u = e11 * u + coupling * p
    common = coupling * u + (e22 - etr) * p
    for j in range(ndirs):
        w_hat[1 + j] = etr * w_hat[1 + j] + khat[j] * common
    w_hat[0] = new_u
    return w_hat
