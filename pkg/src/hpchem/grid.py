"""Periodic uniform grids, real fields, spectral calculus and discrete norms.

All fields live on the n-torus [0, L)^n sampled at N points per axis.  The
spectral representation uses the real-input FFT (``numpy.fft.rfftn``), so a
real field of shape ``(N,)*n`` maps to complex coefficients of shape
``(N,)*(n-1) + (N//2 + 1,)``.  Every operation here is a pure function of its
inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Literal, Sequence

import numpy as np

NormKind = Literal["L1", "L2", "Linf"]

__all__ = [
    "Grid",
    "ScalarField",
    "VectorField",
    "SpectralState",
    "make_grid",
    "norm",
    "sobolev_norm",
    "grad",
    "divergence",
    "forward",
    "inverse",
]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [0, length)^dim with points_per_dim per axis.

    Wavenumbers per axis are 2*pi*k/length for k in {-N/2, ..., N/2 - 1}.
    Derived spectral tables (wavenumber grids, quadrature weights) are cached
    on first use.
    """

    dim: int
    points_per_dim: int
    length: float

    @property
    def spacing(self) -> float:
        return self.length / self.points_per_dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_dim,) * self.dim

    @property
    def spectral_shape(self) -> tuple[int, ...]:
        n = self.points_per_dim
        return (n,) * (self.dim - 1) + (n // 2 + 1,)

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        """Physical coordinates along each axis."""
        x = np.arange(self.points_per_dim) * self.spacing
        return (x,) * self.dim

    @cached_property
    def xi_axes(self) -> tuple[np.ndarray, ...]:
        """Angular wavenumbers per axis, rfft layout on the last axis."""
        n, h = self.points_per_dim, self.spacing
        full = 2.0 * np.pi * np.fft.fftfreq(n, d=h)
        last = 2.0 * np.pi * np.fft.rfftfreq(n, d=h)
        return tuple([full] * (self.dim - 1) + [last])

    @cached_property
    def xi_mesh(self) -> np.ndarray:
        """Wavenumber components for differentiation and mode symbols.

        Shape (dim, *spectral_shape).  The unpaired Nyquist slot of each axis
        is zeroed: an odd multiplier there cannot be represented on a real
        field, so the sawtooth mode is treated as frequency zero.  This keeps
        div(grad(f)) and the Laplacian the exact same multiplier and keeps
        the propagator real-to-real.
        """
        axes = [a.copy() for a in self.xi_axes]
        nyq = self.points_per_dim // 2
        for j in range(self.dim - 1):
            axes[j][nyq] = 0.0
        axes[-1][-1] = 0.0
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=0)

    @cached_property
    def xi_sq(self) -> np.ndarray:
        return np.sum(self.xi_mesh**2, axis=0)

    @cached_property
    def xi_norm(self) -> np.ndarray:
        return np.sqrt(self.xi_sq)

    @cached_property
    def xi_unit(self) -> np.ndarray:
        """Unit direction xi/|xi| per mode; zero vector at the mean mode."""
        rho = self.xi_norm
        safe = np.where(rho > 0.0, rho, 1.0)
        unit = self.xi_mesh / safe
        unit[:, rho == 0.0] = 0.0
        return unit

    @cached_property
    def spectral_weights(self) -> np.ndarray:
        """Multiplicity of each rfft coefficient in the full transform.

        Interior modes of the halved last axis stand for a conjugate pair and
        count twice; the k=0 and k=N/2 planes are self-conjugate.
        """
        w_last = np.full(self.spectral_shape[-1], 2.0)
        w_last[0] = 1.0
        w_last[-1] = 1.0
        shape = (1,) * (self.dim - 1) + (self.spectral_shape[-1],)
        return np.broadcast_to(w_last.reshape(shape), self.spectral_shape)

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def num_points(self) -> int:
        return self.points_per_dim**self.dim

    @property
    def fft_axes(self) -> tuple[int, ...]:
        return tuple(range(self.dim))

    def to_physical(self, f_hat: np.ndarray) -> np.ndarray:
        """Inverse real FFT back onto the grid shape."""
        return np.fft.irfftn(f_hat, s=self.shape, axes=self.fft_axes)

    def coordinate_mesh(self) -> np.ndarray:
        """Physical coordinates, shape (dim, *shape)."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack(mesh, axis=0)


def make_grid(dim: int, points_per_dim: int, length: float) -> Grid:
    """Validated grid constructor.

    Raises
    ------
    ValueError
        If ``dim`` is outside {1, 2, 3}, ``points_per_dim`` is not a power of
        two >= 8, or ``length`` is not positive.
    """
    if dim not in (1, 2, 3):
        raise ValueError(f"dim must be 1, 2 or 3, got {dim}")
    if points_per_dim < 8 or not _is_power_of_two(points_per_dim):
        raise ValueError(
            f"points_per_dim must be a power of two >= 8, got {points_per_dim}"
        )
    if not length > 0.0:
        raise ValueError(f"length must be positive, got {length}")
    return Grid(dim=dim, points_per_dim=points_per_dim, length=float(length))


@dataclass
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


@dataclass
class VectorField:
    grid: Grid
    components: tuple[ScalarField, ...]

    def __post_init__(self) -> None:
        if len(self.components) != self.grid.dim:
            raise ValueError("need one component per dimension")
        for c in self.components:
            if c.grid != self.grid:
                raise ValueError("all components must share one grid")

    def magnitude(self) -> ScalarField:
        sq = sum(c.values**2 for c in self.components)
        return ScalarField(self.grid, np.sqrt(sq))

    @classmethod
    def from_arrays(cls, grid: Grid, arrays: Sequence[np.ndarray]) -> "VectorField":
        return cls(grid, tuple(ScalarField(grid, a) for a in arrays))


def forward(f: ScalarField) -> np.ndarray:
    """Real-input FFT of a scalar field."""
    return np.fft.rfftn(f.values)


def inverse(grid: Grid, f_hat: np.ndarray) -> ScalarField:
    """Inverse transform back to a real field on ``grid``."""
    return ScalarField(grid, grid.to_physical(f_hat))


@dataclass
class SpectralState:
    """Fourier-side snapshot of the coupled system.

    ``w_hat`` holds the n+1 components of the symmetrized hyperbolic state,
    conserved component first; ``phi_hat`` the chemoattractant.  Coefficients
    use the rfft layout, so Hermitian symmetry is structural and the inverse
    transform is real.
    """

    grid: Grid
    w_hat: np.ndarray
    phi_hat: np.ndarray

    def __post_init__(self) -> None:
        expected = (self.grid.dim + 1,) + self.grid.spectral_shape
        if self.w_hat.shape != expected:
            raise ValueError(f"w_hat must have shape {expected}, got {self.w_hat.shape}")
        if self.phi_hat.shape != self.grid.spectral_shape:
            raise ValueError(
                f"phi_hat must have shape {self.grid.spectral_shape}, got {self.phi_hat.shape}"
            )

    def copy(self) -> "SpectralState":
        return SpectralState(self.grid, self.w_hat.copy(), self.phi_hat.copy())

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralState":
        return cls(
            grid,
            np.zeros((grid.dim + 1,) + grid.spectral_shape, dtype=complex),
            np.zeros(grid.spectral_shape, dtype=complex),
        )


def _require_finite(values: np.ndarray) -> None:
    if not np.all(np.isfinite(values)):
        raise ValueError("field contains non-finite values")


def norm(f: ScalarField | VectorField, kind: NormKind) -> float:
    """Discrete L1 / L2 / Linf norm with h^n quadrature weights.

    Vector fields are measured through their pointwise Euclidean magnitude,
    so the L2 value coincides with the root-sum-square of component norms.
    """
    if isinstance(f, VectorField):
        f = f.magnitude()
    _require_finite(f.values)
    hn = f.grid.cell_volume
    if kind == "L1":
        return float(hn * np.sum(np.abs(f.values)))
    if kind == "L2":
        return float(np.sqrt(hn * np.sum(f.values**2)))
    if kind == "Linf":
        return float(np.max(np.abs(f.values)))
    raise ValueError(f"unknown norm kind {kind!r}")


def spectral_l2(grid: Grid, f_hat: np.ndarray) -> float:
    """L2 norm evaluated on the Fourier side (Parseval)."""
    hn = grid.cell_volume
    s = np.sum(grid.spectral_weights * np.abs(f_hat) ** 2)
    return float(np.sqrt(hn / grid.num_points * s))


def spectral_sobolev(grid: Grid, f_hat: np.ndarray, s: float) -> float:
    """H^s norm from spectral coefficients; s=0 reduces to the L2 norm."""
    if s < 0:
        raise ValueError("Sobolev order must be >= 0")
    weight = (1.0 + grid.xi_sq) ** s
    total = np.sum(grid.spectral_weights * weight * np.abs(f_hat) ** 2)
    return float(np.sqrt(grid.cell_volume / grid.num_points * total))


def sobolev_norm(f: ScalarField, s: float) -> float:
    """H^s norm: (1+|xi|^2)^(s/2)-weighted spectral L2.

    Normalized so that s=0 reproduces ``norm(f, "L2")``.
    """
    return spectral_sobolev(f.grid, forward(f), s)


def grad(f: ScalarField) -> VectorField:
    """Spectral gradient: multiply mode k by i*xi_k per axis."""
    grid = f.grid
    f_hat = forward(f)
    comps = [
        grid.to_physical(1j * grid.xi_mesh[j] * f_hat)
        for j in range(grid.dim)
    ]
    return VectorField.from_arrays(grid, comps)


def divergence(v: VectorField) -> ScalarField:
    """Spectral divergence of a vector field."""
    grid = v.grid
    acc = np.zeros(grid.spectral_shape, dtype=complex)
    for j in range(grid.dim):
        acc += 1j * grid.xi_mesh[j] * forward(v.components[j])
    return ScalarField(grid, grid.to_physical(acc))


def laplacian(f: ScalarField) -> ScalarField:
    grid = f.grid
    return ScalarField(grid, grid.to_physical(-grid.xi_sq * forward(f)))


def mass(grid: Grid, f_hat: np.ndarray) -> float:
    """Integral of the field over the torus, read off the mean mode."""
    dc = f_hat[(0,) * grid.dim]
    return float(dc.real) * grid.cell_volume
