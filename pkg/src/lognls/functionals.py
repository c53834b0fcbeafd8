"""Scalar functionals: energies, mass, action, Nehari machinery, Orlicz
norm, and the logarithmic Sobolev gap.

All quantities are computed with the spectral gradient and Riemann-sum
quadrature from the lattice module.  The logarithm is regularized by a
floor on |u|^2 far below quadrature noise (default 1e-300); density values
under the floor contribute exactly zero, matching the continuous extension
s^2 log s^2 -> 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import (RealField, WaveField, grad_norm_sq, integrate,
                      integrate_values, l2_norm_sq)
from .potentials import Potential

LOG_FLOOR = 1e-300

# Breakpoint of the Young function branches.
_E3 = np.exp(-3.0)
_E6 = np.exp(-6.0)


@dataclass(frozen=True)
class FunctionalReport:
    """Snapshot of every scalar functional of a field."""

    E_unscaled: float
    E_scaled: float
    Q_scaled: float
    S_val: float
    I_val: float
    logterm: float


def log_density(u: WaveField, floor: float = LOG_FLOOR) -> RealField:
    """Pointwise |u|^2 log |u|^2 with sub-floor values set to exactly 0."""
    if floor < 0:
        raise ValueError("floor must be >= 0")
    dens = np.abs(u.values) ** 2
    out = np.zeros_like(dens)
    mask = dens > floor
    out[mask] = dens[mask] * np.log(dens[mask])
    return RealField(u.grid, out)


def logterm(u: WaveField, floor: float = LOG_FLOOR) -> float:
    """Integral of |u|^2 log |u|^2."""
    return integrate(log_density(u, floor))


def mass_scaled(u: WaveField) -> float:
    """Scaled mass eps^(-N) |u|_L2^2."""
    return u.eps ** (-u.grid.dim) * l2_norm_sq(u)


def energy_scaled(u: WaveField, V: Potential) -> float:
    """Scaled energy: kinetic/(2 eps^(N-2)) + potential and log terms at eps^(-N)."""
    N = u.grid.dim
    kin = grad_norm_sq(u)
    dens = np.abs(u.values) ** 2
    pot = integrate_values(u.grid, V.evaluate(u.grid).values * dens)
    return (kin / (2.0 * u.eps ** (N - 2))
            + u.eps ** (-N) * pot
            - u.eps ** (-N) * logterm(u))


def energy_unscaled(u: WaveField) -> float:
    """E(u) = 1/2 |grad u|^2 - int |u|^2 log |u|^2 (no potential, no eps)."""
    return 0.5 * grad_norm_sq(u) - logterm(u)


def action_S(u: WaveField) -> float:
    """S(u) = 1/4 |grad u|^2 + |u|^2 - 1/2 int |u|^2 log |u|^2."""
    return 0.25 * grad_norm_sq(u) + l2_norm_sq(u) - 0.5 * logterm(u)


def nehari_I(u: WaveField) -> float:
    """Nehari functional I(u) = 1/2 |grad u|^2 + |u|^2 - int |u|^2 log |u|^2."""
    return 0.5 * grad_norm_sq(u) + l2_norm_sq(u) - logterm(u)


def nehari_scale(u: WaveField) -> float:
    """The multiplier lambda* with I(lambda* u) = 0.

    Scaling the field pulls a -log(lambda^2)|u|^2 out of the log term, so
    I(lambda u) = lambda^2 (I(u) - log(lambda^2) |u|^2) and the root is
    lambda* = exp(I(u) / (2 |u|^2)).
    """
    q = l2_norm_sq(u)
    if q == 0.0:
        raise ValueError("undefined Nehari scaling for the zero field")
    return float(np.exp(nehari_I(u) / (2.0 * q)))


def report(u: WaveField, V: Potential) -> FunctionalReport:
    return FunctionalReport(
        E_unscaled=energy_unscaled(u),
        E_scaled=energy_scaled(u, V),
        Q_scaled=mass_scaled(u),
        S_val=action_S(u),
        I_val=nehari_I(u),
        logterm=logterm(u),
    )


def phi_young(s):
    """Young function: -s^2 log s^2 on [0, e^-3], 3s^2 + 4e^-3 s - e^-6 beyond."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("phi_young requires s >= 0")
    out = np.where(s >= _E3, 3.0 * s ** 2 + 4.0 * _E3 * s - _E6, 0.0)
    small = (s > 0) & (s < _E3)
    if np.any(small):
        ss = np.where(small, s, 1.0)
        out = np.where(small, -ss ** 2 * np.log(ss ** 2), out)
    return out if out.ndim else float(out)


def psi_fn(s):
    """Psi = F + Phi with F(s) = s^2 log s^2 (continuously extended at 0)."""
    s = np.asarray(s, dtype=float)
    safe = np.where(s == 0.0, 1.0, np.abs(s))
    F = np.where(s == 0.0, 0.0, safe ** 2 * np.log(safe ** 2))
    out = F + phi_young(np.abs(s))
    return out if out.ndim else float(out)


def luxemburg_norm(u: WaveField, rtol: float = 1e-10) -> float:
    """Luxemburg gauge norm inf{k > 0 : int Phi(|u|/k) <= 1} by bisection.

    The map k -> int Phi(|u|/k) is strictly decreasing, so we bracket the
    unit level set starting from [1e-8, 1e8]*max|u| and bisect.
    """
    absu = np.abs(u.values)
    peak = float(absu.max())
    if peak == 0.0:
        return 0.0

    def level(k: float) -> float:
        return integrate_values(u.grid, phi_young(absu / k)) - 1.0

    k_lo, k_hi = 1e-8 * peak, 1e8 * peak
    while level(k_lo) < 0.0:
        k_lo *= 0.5
    while level(k_hi) > 0.0:
        k_hi *= 2.0
    while (k_hi - k_lo) > rtol * k_hi:
        mid = 0.5 * (k_lo + k_hi)
        if level(mid) > 0.0:
            k_lo = mid
        else:
            k_hi = mid
    return float(k_hi)


def log_sobolev_gap(u: WaveField, alpha: float) -> float:
    """RHS minus LHS of the logarithmic Sobolev inequality at parameter alpha.

    int |u|^2 log |u|^2 <= (alpha^2/pi)|grad u|^2
                           + (log |u|^2_L2 - N(1 + log alpha)) |u|^2_L2.
    Nonnegative for every admissible field; zero at the Gaussian R with the
    optimal alpha = sqrt(pi/2).
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    N = u.grid.dim
    q = l2_norm_sq(u)
    if q == 0.0:
        raise ValueError("log_sobolev_gap requires a nonzero field")
    rhs = (alpha ** 2 / np.pi * grad_norm_sq(u)
           + (np.log(q) - N * (1.0 + np.log(alpha))) * q)
    return float(rhs - logterm(u))


def energy_gradient(u: WaveField, floor: float = LOG_FLOOR) -> WaveField:
    """First variation E'(u) = -Lap u - 2 u log|u|^2 - 2u (real pairing)."""
    from .lattice import laplacian_values
    dens = np.abs(u.values) ** 2
    logd = np.where(dens > floor, np.log(np.where(dens > floor, dens, 1.0)), 0.0)
    vals = -laplacian_values(u.grid, u.values) - 2.0 * u.values * logd - 2.0 * u.values
    return u.with_values(vals)


def classical_hamiltonian(x, nu, V: Potential) -> float:
    """H = |nu|^2/2 + V(x)."""
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    return float(0.5 * nu @ nu + V(x))
