import numpy as np
import pytest

from lognls.gausson import analytic_constants
from lognls.lattice import GridSpec, WaveField, make_grid


@pytest.fixture(scope="session")
def grid_1d():
    """Default unscaled 1-D grid: L=20, M=1024."""
    return make_grid(1, 20.0, 1024)


@pytest.fixture(scope="session")
def grid_2d():
    return make_grid(2, 20.0, 256)


@pytest.fixture(scope="session")
def m_const():
    return analytic_constants(1)["m"]


def random_band_limited(grid: GridSpec, rng, n_modes: int = 8,
                        kmax: float = 3.0, envelope: bool = True) -> WaveField:
    """Random smooth complex field, optionally with a Gaussian envelope so
    it decays inside the box (Sigma-class sample)."""
    coords = grid.coords()
    vals = np.zeros(grid.shape, dtype=complex)
    for _ in range(n_modes):
        k = rng.uniform(-kmax, kmax, size=grid.dim)
        amp = rng.normal() + 1j * rng.normal()
        phase = sum(kj * c for kj, c in zip(k, coords))
        vals = vals + amp * np.exp(1j * phase)
    if envelope:
        r2 = sum(c ** 2 for c in coords)
        vals = vals * np.exp(-r2 / 2.0)
    return WaveField(grid, 1.0, vals)
