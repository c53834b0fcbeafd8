"""Periodic spectral grids, quadrature, differentiation, and norms.

Fields live on a periodic tensor box [-L/2, L/2)^N with N in {1, 2}.  All
derivatives are spectral (FFT multipliers) and the quadrature is the plain
Riemann sum, which is spectrally accurate for smooth periodic integrands.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

# Resolution rule: at least ~32 nodes per Gausson width (the soliton has
# spatial width O(eps) in the semiclassical frame).
POINTS_PER_WIDTH = 32


class ResolutionWarning(UserWarning):
    """Grid too coarse to resolve the requested semiclassical width."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on [-L/2, L/2)^N.

    extent and points are per-axis tuples; points must be powers of two so
    the FFT path stays fast and the wavenumber set is the standard signed
    one (symmetric about zero except the single Nyquist mode).
    """

    dim: int
    extent: tuple[float, ...]
    points: tuple[int, ...]

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if len(self.extent) != self.dim or len(self.points) != self.dim:
            raise ValueError("extent and points must have one entry per axis")
        for L in self.extent:
            if L <= 0:
                raise ValueError("extent must be positive")
        for M in self.points:
            if M < 2 or (M & (M - 1)) != 0:
                raise ValueError(f"points must be a power of two, got {M}")

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / M for L, M in zip(self.extent, self.points))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @property
    def size(self) -> int:
        return int(np.prod(self.points))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis(self, j: int) -> np.ndarray:
        """Node coordinates along axis j."""
        L, M = self.extent[j], self.points[j]
        return -L / 2 + (L / M) * np.arange(M)

    def coords(self) -> list[np.ndarray]:
        """Meshgrid coordinate arrays, one per axis, shaped like a field."""
        axes = [self.axis(j) for j in range(self.dim)]
        if self.dim == 1:
            return axes
        return list(np.meshgrid(*axes, indexing="ij"))

    def wavenumbers(self, j: int) -> np.ndarray:
        """Signed spectral wavenumbers 2*pi*j'/L along axis j (FFT order)."""
        L, M = self.extent[j], self.points[j]
        return 2.0 * np.pi * np.fft.fftfreq(M, d=L / M)

    def wavenumber_mesh(self) -> list[np.ndarray]:
        ks = [self.wavenumbers(j) for j in range(self.dim)]
        if self.dim == 1:
            return ks
        return list(np.meshgrid(*ks, indexing="ij"))

    def check_resolution(self, eps: float) -> bool:
        """Warn if the grid under-resolves a soliton of width eps."""
        ok = True
        for L, M in zip(self.extent, self.points):
            if M < POINTS_PER_WIDTH * L / eps:
                ok = False
        if not ok:
            warnings.warn(
                f"grid {self.points} under-resolves eps={eps}: "
                f"rule of thumb is M >= {POINTS_PER_WIDTH}*L/eps",
                ResolutionWarning,
                stacklevel=2,
            )
        return ok


def make_grid(dim: int, extent: float | tuple[float, ...],
              points: int | tuple[int, ...]) -> GridSpec:
    """Convenience constructor broadcasting scalar extent/points to all axes."""
    if np.isscalar(extent):
        extent = (float(extent),) * dim
    if np.isscalar(points):
        points = (int(points),) * dim
    return GridSpec(dim=dim, extent=tuple(float(L) for L in extent),
                    points=tuple(int(M) for M in points))


@dataclass(frozen=True)
class WaveField:
    """Complex field on a grid, tagged with the semiclassical parameter eps."""

    grid: GridSpec
    eps: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        v = np.asarray(self.values, dtype=complex)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} != grid shape {self.grid.shape}")
        object.__setattr__(self, "values", v)

    def with_values(self, values: np.ndarray) -> "WaveField":
        return WaveField(self.grid, self.eps, values)

    def density(self) -> "RealField":
        """|u|^2 as a real field."""
        return RealField(self.grid, np.abs(self.values) ** 2)


@dataclass(frozen=True)
class RealField:
    """Real field on a grid (potentials, densities, cutoffs)."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} != grid shape {self.grid.shape}")
        object.__setattr__(self, "values", v)


def integrate(f: RealField) -> float:
    """Riemann-sum quadrature h^N * sum(values)."""
    return float(f.grid.cell_volume * np.sum(f.values))


def integrate_values(grid: GridSpec, values: np.ndarray) -> float:
    """Quadrature of a bare array of samples on a grid."""
    return float(grid.cell_volume * np.sum(values))


def gradient_values(grid: GridSpec, values: np.ndarray) -> list[np.ndarray]:
    """Spectral gradient of complex samples; one array per axis."""
    vhat = np.fft.fftn(values)
    kmesh = grid.wavenumber_mesh()
    return [np.fft.ifftn(1j * k * vhat) for k in kmesh]


def gradient(u: WaveField) -> list[WaveField]:
    """Spectral derivative along every axis."""
    return [u.with_values(g) for g in gradient_values(u.grid, u.values)]


def laplacian_values(grid: GridSpec, values: np.ndarray) -> np.ndarray:
    vhat = np.fft.fftn(values)
    k2 = sum(k ** 2 for k in grid.wavenumber_mesh())
    return np.fft.ifftn(-k2 * vhat)


def l2_norm_sq(u: WaveField) -> float:
    """Unscaled squared L2 norm, integral of |u|^2."""
    return integrate_values(u.grid, np.abs(u.values) ** 2)


def grad_norm_sq(u: WaveField) -> float:
    """Integral of |grad u|^2 (unscaled)."""
    return sum(integrate_values(u.grid, np.abs(g) ** 2)
               for g in gradient_values(u.grid, u.values))


def h1_eps_norm_sq(u: WaveField) -> float:
    """Scaled Sobolev norm eps^(2-N)*|grad u|^2 + eps^(-N)*|u|^2."""
    N = u.grid.dim
    return (u.eps ** (2 - N) * grad_norm_sq(u)
            + u.eps ** (-N) * l2_norm_sq(u))


def sigma_norm_sq(u: WaveField) -> float:
    """Squared Sigma norm: integral of |grad u|^2 + |x|^2|u|^2 + |u|^2."""
    x2 = sum(c ** 2 for c in u.grid.coords())
    dens = np.abs(u.values) ** 2
    return grad_norm_sq(u) + integrate_values(u.grid, (x2 + 1.0) * dens)
