"""Strang-splitting propagator for the semiclassical logarithmic NLS.

The equation i eps u_t + (eps^2/2) Lap u - V u + u log|u|^2 = 0 splits into
a kinetic flow (exact Fourier multiplier) and a combined potential+log flow
that is *exact* as well: V - log|u|^2 commutes with itself pointwise and
|u| is invariant under pure phase rotation.  All splitting error therefore
sits in the kinetic/nonlinear commutator, giving clean second order in dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .functionals import LOG_FLOOR, energy_scaled, mass_scaled
from .gausson import momentum_density
from .lattice import RealField, WaveField, gradient_values, integrate, integrate_values
from .potentials import Potential


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    t_final: float
    log_floor: float = LOG_FLOOR
    record_every: int = 1

    def __post_init__(self):
        if self.dt <= 0 or self.t_final <= 0:
            raise ValueError("dt and t_final must be positive")
        if self.dt > self.t_final:
            raise ValueError("dt must not exceed t_final")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


def default_dt(eps: float) -> float:
    """Phase oscillates at rate 1/eps, so the step scales with eps."""
    return min(eps * 1e-3, 1e-4)


@dataclass(frozen=True)
class StepDiagnostics:
    """Conserved-quantity monitors emitted along a run."""

    t: float
    Q: float
    E: float
    P: tuple[float, ...]
    com: tuple[float, ...]


def total_momentum(u: WaveField) -> np.ndarray:
    return np.array([integrate(p) for p in momentum_density(u)])


def center_of_mass(u: WaveField, chi: Optional[np.ndarray] = None) -> np.ndarray:
    """(Optionally cutoff-localized) center of mass of |u|^2."""
    dens = np.abs(u.values) ** 2
    if chi is not None:
        dens = dens * chi
    norm = integrate_values(u.grid, dens)
    coords = u.grid.coords()
    return np.array([integrate_values(u.grid, c * dens) / norm for c in coords])


def _phase_flow(values: np.ndarray, Vgrid: np.ndarray, eps: float,
                tau: float, floor: float) -> np.ndarray:
    """Exact potential+log sub-flow: u <- exp(-i tau/eps (V - log|u|^2)) u."""
    dens = np.abs(values) ** 2
    logd = np.where(dens > floor, np.log(np.where(dens > floor, dens, 1.0)), 0.0)
    return np.exp(-1j * (tau / eps) * (Vgrid - logd)) * values


def _kinetic_flow(values: np.ndarray, k2: np.ndarray, eps: float,
                  tau: float, target_norm_sq: float | None = None) -> np.ndarray:
    """Exact kinetic sub-flow in Fourier space.

    Both sub-flows are exactly norm-preserving, so the l2 norm is restored
    after the FFT round trip; rescaling to a *fixed* target (rather than
    the pre-step value) keeps the roundoff from accumulating linearly
    (about 1.6e-16 of mass per step) over long runs.
    """
    if target_norm_sq is None:
        target_norm_sq = float(np.vdot(values, values).real)
    out = np.fft.ifftn(np.exp(-1j * eps * k2 * tau / 2.0) * np.fft.fftn(values))
    n_after = float(np.vdot(out, out).real)
    return out * math.sqrt(target_norm_sq / n_after)


def step_strang(u: WaveField, V: Potential, dt: float,
                cfg: Optional[SolverConfig] = None) -> WaveField:
    """One Strang step: half phase flow, full kinetic flow, half phase flow."""
    floor = cfg.log_floor if cfg is not None else LOG_FLOOR
    Vgrid = V.evaluate(u.grid).values
    k2 = sum(k ** 2 for k in u.grid.wavenumber_mesh())
    vals = _phase_flow(u.values, Vgrid, u.eps, dt / 2.0, floor)
    vals = _kinetic_flow(vals, k2, u.eps, dt)
    vals = _phase_flow(vals, Vgrid, u.eps, dt / 2.0, floor)
    if not np.all(np.isfinite(vals)):
        raise RuntimeError("NaN/Inf after Strang step")
    return u.with_values(vals)


def propagate(u0: WaveField, V: Potential, cfg: SolverConfig,
              sink: Optional[Callable[[StepDiagnostics], None]] = None,
              field_sink: Optional[Callable[[float, WaveField], None]] = None,
              mass_drift_abort: float = 1e-8) -> WaveField:
    """Step to t_final, emitting diagnostics every record_every steps.

    field_sink, when given, receives (t, field) at the same cadence as the
    diagnostics sink (including t=0 and the final time).
    """
    u0.grid.check_resolution(u0.eps)
    Vgrid = V.evaluate(u0.grid).values
    k2 = sum(k ** 2 for k in u0.grid.wavenumber_mesh())
    n_steps = int(round(cfg.t_final / cfg.dt))
    Q0 = mass_scaled(u0)

    def emit(t: float, field: WaveField) -> None:
        if sink is not None:
            sink(StepDiagnostics(
                t=t,
                Q=mass_scaled(field),
                E=energy_scaled(field, V),
                P=tuple(total_momentum(field)),
                com=tuple(center_of_mass(field)),
            ))
        if field_sink is not None:
            field_sink(t, field)

    emit(0.0, u0)
    vals = u0.values
    norm0_sq = float(np.vdot(vals, vals).real)
    for k in range(n_steps):
        vals = _phase_flow(vals, Vgrid, u0.eps, cfg.dt / 2.0, cfg.log_floor)
        vals = _kinetic_flow(vals, k2, u0.eps, cfg.dt, norm0_sq)
        vals = _phase_flow(vals, Vgrid, u0.eps, cfg.dt / 2.0, cfg.log_floor)
        if not np.all(np.isfinite(vals)):
            raise RuntimeError(f"NaN/Inf detected at step {k + 1}")
        t = (k + 1) * cfg.dt
        if (k + 1) % cfg.record_every == 0 or (k + 1) == n_steps:
            field = u0.with_values(vals)
            Q = mass_scaled(field)
            if abs(Q - Q0) > mass_drift_abort * abs(Q0):
                raise RuntimeError(
                    f"mass drift {abs(Q - Q0) / abs(Q0):.3e} at t={t:.6g} "
                    f"exceeds abort threshold")
            emit(t, field)
    return u0.with_values(vals)


def check_identities(u_series: list[WaveField], V: Potential,
                     dt_sample: float) -> dict[str, np.ndarray]:
    """Centered-difference residuals of the continuity and momentum identities.

    id1: d/dt (|u|^2 / eps^N) + div p_eps = 0  (L2 residual per interior sample)
    id2: d/dt int p_eps + int grad V |u|^2 / eps^N = 0  (absolute residual)
    """
    if len(u_series) < 3:
        raise ValueError("need at least 3 consecutive samples")
    grid = u_series[0].grid
    eps = u_series[0].eps
    N = grid.dim
    Vgrad_fields = None
    if V.kind != "zero":
        coords = grid.coords()
        # analytic grad V sampled on the grid, one array per axis
        Vgrad_fields = _potential_gradient_on_grid(V, coords)

    id1 = []
    id2 = []
    for i in range(1, len(u_series) - 1):
        um, u0, up = u_series[i - 1], u_series[i], u_series[i + 1]
        ddt_dens = (np.abs(up.values) ** 2 - np.abs(um.values) ** 2) / (
            2.0 * dt_sample * eps ** N)
        div_p = np.zeros(grid.shape)
        for j, p in enumerate(momentum_density(u0)):
            div_p = div_p + np.real(gradient_values(grid, p.values.astype(complex))[j])
        resid_field = ddt_dens + div_p
        id1.append(np.sqrt(integrate_values(grid, resid_field ** 2)))

        dP = (total_momentum(up) - total_momentum(um)) / (2.0 * dt_sample)
        dens0 = np.abs(u0.values) ** 2 / eps ** N
        if Vgrad_fields is None:
            force = np.zeros(grid.dim)
        else:
            force = np.array([integrate_values(grid, g * dens0)
                              for g in Vgrad_fields])
        id2.append(float(np.linalg.norm(dP + force)))
    return {"id1_resid": np.array(id1), "id2_resid": np.array(id2)}


def _potential_gradient_on_grid(V: Potential, coords: list[np.ndarray]) -> list[np.ndarray]:
    """Analytic grad V on the full grid, vectorized per kind."""
    if V.kind == "zero":
        return [np.zeros_like(c) for c in coords]
    if V.kind == "gaussian_bump":
        c = V.center if V.center else (0.0,) * len(coords)
        r2 = sum((x - cj) ** 2 for x, cj in zip(coords, c))
        core = V.amplitude * np.exp(-r2 / (2.0 * V.width ** 2))
        return [-(x - cj) / V.width ** 2 * core for x, cj in zip(coords, c)]
    kap = V.wavevector if V.wavevector else (1.0,) * len(coords)
    return [-V.amplitude * kj * np.sin(kj * x) for x, kj in zip(coords, kap)]
