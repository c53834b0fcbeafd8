"""Bounded external potentials with analytic gradients.

Only potentials that are C^3 and bounded with bounded derivatives ship here;
the harmonic trap is deliberately excluded.  Every potential carries an
additive shift making it nonnegative (a harmless gauge: V -> V + w only
rotates the solution phase).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import GridSpec, RealField


@dataclass(frozen=True)
class Potential:
    """One of the built-in bounded potential shapes.

    kind 'zero':          V(x) = shift
    kind 'gaussian_bump': V(x) = shift + A * exp(-|x - c|^2 / (2 s^2))
    kind 'cosine':        V(x) = shift + A * sum_j cos(kappa_j x_j)
    """

    kind: str
    amplitude: float = 0.0
    center: tuple[float, ...] = ()
    width: float = 1.0
    wavevector: tuple[float, ...] = ()
    offset: float = 0.0
    shift: float = field(init=False)

    def __post_init__(self):
        if self.kind not in ("zero", "gaussian_bump", "cosine"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "gaussian_bump" and self.width <= 0:
            raise ValueError("width must be positive")
        # shift = max(0, -inf V) + user offset, so min V >= 0 always.
        if self.kind == "zero":
            inf_v = 0.0
        elif self.kind == "gaussian_bump":
            inf_v = min(0.0, self.amplitude)
        else:
            inf_v = -abs(self.amplitude) * max(1, len(self.wavevector))
        object.__setattr__(self, "shift", max(0.0, -inf_v) + self.offset)

    def _core(self, coords: list[np.ndarray]):
        if self.kind == "zero":
            return np.zeros_like(coords[0])
        if self.kind == "gaussian_bump":
            c = self.center if self.center else (0.0,) * len(coords)
            r2 = sum((x - cj) ** 2 for x, cj in zip(coords, c))
            return self.amplitude * np.exp(-r2 / (2.0 * self.width ** 2))
        kap = self.wavevector if self.wavevector else (1.0,) * len(coords)
        return self.amplitude * sum(np.cos(kj * x) for x, kj in zip(coords, kap))

    def __call__(self, x) -> float:
        """Value at a single point (array-like of per-axis coordinates)."""
        coords = [np.asarray(xi, dtype=float) for xi in np.atleast_1d(x)]
        return float(self._core(coords) + self.shift)

    def evaluate(self, grid: GridSpec) -> RealField:
        """Pointwise values on a grid, shift applied."""
        return RealField(grid, self._core(grid.coords()) + self.shift)

    def grad(self, x) -> np.ndarray:
        """Analytic gradient at a point."""
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        if self.kind == "zero":
            return np.zeros_like(xs)
        if self.kind == "gaussian_bump":
            c = np.asarray(self.center if self.center else (0.0,) * xs.size)
            d = xs - c
            core = self.amplitude * np.exp(-np.dot(d, d) / (2.0 * self.width ** 2))
            return -d / self.width ** 2 * core
        kap = np.asarray(self.wavevector if self.wavevector else (1.0,) * xs.size)
        return -self.amplitude * kap * np.sin(kap * xs)

    def sup_bound(self) -> float:
        """Analytic supremum of |V| (shift included)."""
        if self.kind == "zero":
            return self.shift
        if self.kind == "gaussian_bump":
            return self.shift + abs(self.amplitude)
        return self.shift + abs(self.amplitude) * max(1, len(self.wavevector))


def check_gradient(V: Potential, samples: int, dim: int = 1,
                   span: float = 8.0, seed: int = 0) -> float:
    """Max relative error of the analytic gradient against 4th-order
    central finite differences at random points."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    h = 1e-3
    worst = 0.0
    for _ in range(samples):
        x = rng.uniform(-span, span, size=dim)
        g = V.grad(x)
        for j in range(dim):
            e = np.zeros(dim)
            e[j] = 1.0
            fd = (-V(x + 2 * h * e) + 8 * V(x + h * e)
                  - 8 * V(x - h * e) + V(x - 2 * h * e)) / (12 * h)
            scale = max(1.0, abs(fd))
            worst = max(worst, abs(g[j] - fd) / scale)
    return worst
