"""Model parameters, the nonlinear source catalog, symmetrized system
matrices and the dissipation-coupling (Shizuta-Kawashima type) check.

The underlying balance law, written in symmetrized variables w = (u, v/gamma),
is

    d_t u + gamma div(v) = 0
    d_t v + gamma grad(u) = -beta v  + nonlinear sources
    d_t phi = Lap(phi) + a u - b phi + nonlinear sources

with flux matrices A_j carrying a single symmetric pair of gamma entries and
a source linearization B = diag(0, -beta I).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .grid import ScalarField, VectorField, grad

__all__ = [
    "BlowUpError",
    "ModelParams",
    "SourceSpec",
    "SystemMatrices",
    "StationaryState",
    "cd_transform",
    "cd_inverse",
    "build_matrices",
    "sk_check",
    "SKResult",
    "evaluate_sources",
]


class BlowUpError(RuntimeError):
    """A field stopped being finite: blow-up or numerical instability."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


@dataclass(frozen=True)
class ModelParams:
    """Characteristic speed, damping and chemoattractant production/decay.

    The modeled regime has all four parameters strictly positive; ``a`` and
    ``b`` may be zero here so that the solver can be run in pure-linear
    verification mode (decoupled flux pair, free heat flow).
    """

    gamma: float = 1.0
    beta: float = 1.0
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self) -> None:
        for name in ("gamma", "beta"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")
        for name in ("a", "b"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def diffusive_coefficient(self) -> float:
        """Effective diffusivity of the conserved variable, gamma^2/beta."""
        return self.gamma**2 / self.beta


# ---------------------------------------------------------------------------
# Source catalog
# ---------------------------------------------------------------------------

_BBAR_KINDS = ("zero", "linear")  # linear: c * phi
_H_KINDS = ("zero", "grad", "grad_sat")  # chi*grad(phi), chi*grad(phi)/(1+phi^2)
_G_KINDS = ("zero", "linear")  # c * u
_FBAR_KINDS = ("zero", "quad")  # c1*u^2 + c2*phi^2


@dataclass(frozen=True)
class SourceSpec:
    """Closed-form nonlinear sources.

    Each slot picks one entry of a fixed catalog, so the smallness bounds
    (vanishing at the origin, linear or quadratic growth nearby) can be
    verified mechanically; see :meth:`growth_constants`.
    """

    bbar_kind: str = "zero"
    h_kind: str = "grad"
    g_kind: str = "linear"
    fbar_kind: str = "zero"
    chi: float = 1.0
    bbar_coeff: float = 0.0
    g_coeff: float = 1.0
    fbar_c1: float = 0.0
    fbar_c2: float = 0.0

    def __post_init__(self) -> None:
        checks = (
            (self.bbar_kind, _BBAR_KINDS, "bbar_kind"),
            (self.h_kind, _H_KINDS, "h_kind"),
            (self.g_kind, _G_KINDS, "g_kind"),
            (self.fbar_kind, _FBAR_KINDS, "fbar_kind"),
        )
        for value, allowed, name in checks:
            if value not in allowed:
                raise ValueError(f"{name} must be one of {allowed}, got {value!r}")

    @classmethod
    def zero(cls) -> "SourceSpec":
        return cls(h_kind="zero", g_kind="zero")

    @property
    def is_linear(self) -> bool:
        """True when every catalog slot is switched off."""
        return (
            self.bbar_kind == "zero"
            and (self.h_kind == "zero" or self.g_kind == "zero")
            and self.fbar_kind == "zero"
        )

    # pointwise evaluations -------------------------------------------------

    def bbar(self, phi: np.ndarray, grad_phi: Sequence[np.ndarray]) -> np.ndarray:
        if self.bbar_kind == "zero":
            return np.zeros_like(phi)
        return self.bbar_coeff * phi

    def h(self, phi: np.ndarray, grad_phi: Sequence[np.ndarray]) -> list[np.ndarray]:
        if self.h_kind == "zero":
            return [np.zeros_like(phi) for _ in grad_phi]
        if self.h_kind == "grad":
            return [self.chi * g for g in grad_phi]
        damp = 1.0 / (1.0 + phi**2)
        return [self.chi * g * damp for g in grad_phi]

    def g(self, u: np.ndarray) -> np.ndarray:
        if self.g_kind == "zero":
            return np.zeros_like(u)
        return self.g_coeff * u

    def fbar(self, u: np.ndarray, phi: np.ndarray) -> np.ndarray:
        if self.fbar_kind == "zero":
            return np.zeros_like(u)
        return self.fbar_c1 * u**2 + self.fbar_c2 * phi**2

    def growth_constants(self) -> dict[str, float]:
        """Constants for the near-origin growth bounds of each slot.

        |bbar(z,w)| <= B*(|z|+|w|), |h| <= H*(|z|+|w|), |g(z)| <= G*|z|,
        |fbar(z,w)| <= F*(z^2+w^2) on a neighborhood of the origin.
        """
        return {
            "B": abs(self.bbar_coeff) if self.bbar_kind != "zero" else 0.0,
            "H": abs(self.chi) if self.h_kind != "zero" else 0.0,
            "G": abs(self.g_coeff) if self.g_kind != "zero" else 0.0,
            "F": abs(self.fbar_c1) + abs(self.fbar_c2),
        }


# ---------------------------------------------------------------------------
# Symmetrized variables and system matrices
# ---------------------------------------------------------------------------


def cd_transform(u: np.ndarray, v: np.ndarray, gamma: float):
    """Map physical (u, v) to symmetrized variables (w1, w2) = (u, v/gamma)."""
    if not gamma > 0.0:
        raise ValueError("gamma must be strictly positive")
    return np.asarray(u, dtype=float), np.asarray(v, dtype=float) / gamma


def cd_inverse(w1: np.ndarray, w2: np.ndarray, gamma: float):
    """Inverse of :func:`cd_transform`."""
    if not gamma > 0.0:
        raise ValueError("gamma must be strictly positive")
    return np.asarray(w1, dtype=float), np.asarray(w2, dtype=float) * gamma


@dataclass(frozen=True)
class SystemMatrices:
    """Flux matrices A_j and source linearization B of the symmetrized system."""

    A: tuple[np.ndarray, ...]
    B: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.A)

    def flux_symbol(self, xi: np.ndarray) -> np.ndarray:
        """A(xi) = sum_j A_j xi_j."""
        xi = np.asarray(xi, dtype=float)
        out = np.zeros_like(self.B)
        for j in range(self.dim):
            out = out + self.A[j] * xi[j]
        return out


def build_matrices(params: ModelParams, dim: int) -> SystemMatrices:
    """Assemble A_j (gamma pair at row/column j+1) and B = diag(0, -beta I)."""
    if dim not in (1, 2, 3):
        raise ValueError("dim must be 1, 2 or 3")
    size = dim + 1
    mats = []
    for j in range(dim):
        A = np.zeros((size, size))
        A[0, j + 1] = params.gamma
        A[j + 1, 0] = params.gamma
        mats.append(A)
    B = np.zeros((size, size))
    B[1:, 1:] = -params.beta * np.eye(dim)
    return SystemMatrices(A=tuple(mats), B=B)


@dataclass(frozen=True)
class SKResult:
    ok: bool
    witness_xi: np.ndarray | None = None
    witness_vector: np.ndarray | None = None

    def __bool__(self) -> bool:
        return self.ok


def sk_check(
    matrices: SystemMatrices, xi_samples: Sequence[np.ndarray], tol: float = 1e-10
) -> SKResult:
    """Verify that no eigenvector of the flux symbol lies in null(B).

    For each sample direction, eigenvalues of A(xi) are grouped into
    eigenspaces and the smallest singular value of B restricted to each
    eigenspace is compared against ``tol``; a deficient eigenspace yields a
    concrete witness vector.  Degenerate eigenspaces are handled as a whole,
    so arbitrary basis rotations returned by the eigensolver cannot mask a
    violation.
    """
    for xi in xi_samples:
        xi = np.asarray(xi, dtype=float)
        if np.linalg.norm(xi) == 0.0:
            raise ValueError("xi samples must be nonzero")
        symbol = matrices.flux_symbol(xi)
        eigvals, eigvecs = np.linalg.eigh(symbol)
        scale = max(1.0, float(np.max(np.abs(eigvals))))
        order = np.argsort(eigvals)
        eigvals, eigvecs = eigvals[order], eigvecs[:, order]
        start = 0
        while start < len(eigvals):
            stop = start + 1
            while stop < len(eigvals) and abs(eigvals[stop] - eigvals[start]) <= 1e-8 * scale:
                stop += 1
            basis = eigvecs[:, start:stop]
            _, svals, vh = np.linalg.svd(matrices.B @ basis)
            smin = svals[-1] if len(svals) else 0.0
            if smin < tol:
                witness = basis @ vh[-1]
                return SKResult(False, witness_xi=xi, witness_vector=witness)
            start = stop
    return SKResult(True)


@dataclass(frozen=True)
class StationaryState:
    """Spatially constant equilibrium (u_bar, 0, phi_bar) with phi_bar = a/b u_bar."""

    u_bar: float
    phi_bar: float

    def __post_init__(self) -> None:
        if self.u_bar < 0:
            raise ValueError("u_bar must be nonnegative")

    @classmethod
    def from_u_bar(cls, u_bar: float, params: ModelParams) -> "StationaryState":
        return cls(u_bar=u_bar, phi_bar=params.a / params.b * u_bar)


# ---------------------------------------------------------------------------
# Source evaluation on fields
# ---------------------------------------------------------------------------


def evaluate_sources(
    u: ScalarField,
    v: VectorField,
    phi: ScalarField,
    spec: SourceSpec,
    params: ModelParams,
    u_bar: float = 0.0,
) -> tuple[VectorField, ScalarField]:
    """Nonlinear/coupling right-hand sides in physical variables.

    Returns the flux-equation source ``-bbar(phi, grad phi) v + h(phi, grad
    phi) g(u + u_bar shift)`` and the chemoattractant source ``a u +
    fbar(u, phi)``.  The stiff linear parts (-beta v, -b phi, the Laplacian)
    are owned by the exact propagators and never appear here.  Around a
    constant state, ``u_bar`` adds the linear coupling term u_bar * h.

    Raises
    ------
    BlowUpError
        If any output value is non-finite.
    """
    g = u.grid
    if v.grid != g or phi.grid != g:
        raise ValueError("u, v, phi must share one grid")
    gphi = grad(phi)
    gphi_arrays = [c.values for c in gphi.components]
    with np.errstate(invalid="ignore", over="ignore"):
        h_vals = spec.h(phi.values, gphi_arrays)
        g_vals = spec.g(u.values)
        if u_bar != 0.0:
            # perturbation of a constant state: g(u + u_bar) = g(u) + g'(0) u_bar
            g_vals = g_vals + spec.g(np.full_like(u.values, u_bar))
        bbar_vals = spec.bbar(phi.values, gphi_arrays)
        rhs_v_arrays = [
            -bbar_vals * v.components[j].values + h_vals[j] * g_vals for j in range(g.dim)
        ]
        rhs_phi_vals = params.a * u.values + spec.fbar(u.values, phi.values)
    for arr in rhs_v_arrays + [rhs_phi_vals]:
        if not np.all(np.isfinite(arr)):
            raise BlowUpError("non-finite source value: blow-up or instability")
    return VectorField.from_arrays(g, rhs_v_arrays), ScalarField(g, rhs_phi_vals)
