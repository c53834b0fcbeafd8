"""Fast end-to-end invariant checks, one suite per module.

Each check returns (name, passed, detail); the CLI prints one line per
suite.  These are deliberately cheap (seconds, small grids) — the full
acceptance battery lives in the test suite.
"""

from __future__ import annotations

import math

import numpy as np

from .classical_ode import ClassicalState, hamiltonian_drift, solve
from .functionals import (energy_gradient, energy_unscaled, log_sobolev_gap,
                          luxemburg_norm, nehari_I, nehari_scale)
from .gausson import (GaussonParams, analytic_constants, exact_free_solution,
                      initial_datum, profile_R)
from .lattice import l2_norm_sq, make_grid
from .linearized import build_L, coercivity, spectrum
from .nls_solver import SolverConfig, propagate
from .potentials import Potential, check_gradient
from .variational import minimize_energy


def _check_constants():
    grid = make_grid(1, 20.0, 512)
    c = analytic_constants(1)
    R = profile_R(grid)
    err = max(abs(l2_norm_sq(R) - c["m"]),
              abs(energy_unscaled(R) - c["E_R"]),
              abs(nehari_I(R) - c["I_R"]))
    return err < 1e-9, f"max deviation {err:.2e}"


def _check_free_flight():
    grid = make_grid(1, 16.0, 2048)
    p = GaussonParams(eps=0.25, x0=(0.0,), v0=(1.0,))
    u0 = initial_datum(p, grid)
    cfg = SolverConfig(dt=2.5e-4, t_final=0.25)
    u = propagate(u0, Potential(kind="zero"), cfg)
    ue = exact_free_solution(p, grid, 0.25)
    err = math.sqrt(l2_norm_sq(u.with_values(u.values - ue.values)))
    return err < 1e-5, f"L2 error {err:.2e}"


def _check_spectra():
    rep = spectrum(build_L("plus", 1), 4)
    target = np.array([-2.0, 0.0, 2.0, 4.0])
    err = float(np.max(np.abs(rep.eigenvalues - target)))
    return err < 1e-4, f"L+ eigenvalue error {err:.2e}"


def _check_coercivity():
    out = coercivity("full")
    ok = abs(out["Lminus_L2"] - 2.0) < 1e-3 and out["delta_sigma"] > 0
    return ok, (f"Lminus_L2 {out['Lminus_L2']:.6f}, "
                f"delta_sigma {out['delta_sigma']:.4f}")


def _check_functionals():
    grid = make_grid(1, 20.0, 512)
    R = profile_R(grid)
    gap = log_sobolev_gap(R, math.sqrt(math.pi / 2.0))
    x = grid.coords()[0]
    v = R.with_values(R.values * (1.0 + 0.2 * np.sin(x)))
    lam = nehari_scale(v)
    resid = nehari_I(v.with_values(lam * v.values))
    lux = luxemburg_norm(R)
    ok = abs(gap) < 1e-10 and abs(resid) < 1e-8 and lux > 0
    return ok, f"LS gap {gap:.2e}, Nehari resid {resid:.2e}"


def _check_gradient():
    grid = make_grid(1, 20.0, 512)
    R = profile_R(grid)
    x = grid.coords()[0]
    u = R.with_values(R.values * (1.0 + 0.1 * np.cos(x)))
    w = R.with_values(np.exp(-x ** 2) * (1.0 + 0.3j))
    g = energy_gradient(u)
    s = 1e-6
    fd = (energy_unscaled(u.with_values(u.values + s * w.values))
          - energy_unscaled(u.with_values(u.values - s * w.values))) / (2 * s)
    pairing = float(np.sum(np.real(np.conj(g.values) * w.values))
                    * grid.cell_volume)
    err = abs(fd - pairing) / max(1.0, abs(fd))
    ok = err < 1e-6
    worst = check_gradient(
        Potential(kind="gaussian_bump", amplitude=1.0, center=(0.5,),
                  width=1.2), 20, 1, 4.0)
    return ok and worst < 1e-6, f"E' pairing err {err:.2e}, grad V err {worst:.2e}"


def _check_classical():
    V = Potential(kind="gaussian_bump", amplitude=1.0, center=(2.0,), width=1.0)
    traj = solve(ClassicalState(x=(0.0,), nu=(1.0,), t=0.0), V, 5.0, 1e-3)
    drift = hamiltonian_drift(traj, V)
    return drift < 1e-7, f"H drift {drift:.2e}"


def _check_minimize():
    grid = make_grid(1, 20.0, 512)
    m = analytic_constants(1)["m"]
    x = grid.coords()[0]
    init = profile_R(grid).with_values(np.exp(-x ** 2 / 4).astype(complex))
    res = minimize_energy(init, m, max_iter=500)
    gap = abs(res.energy + m)
    return gap < 1e-6 * m, f"E - E(R) = {gap:.2e}"


_SUITES = [
    ("analytic-constants", _check_constants),
    ("free-flight", _check_free_flight),
    ("spectra", _check_spectra),
    ("coercivity", _check_coercivity),
    ("functionals", _check_functionals),
    ("gradients", _check_gradient),
    ("classical-ode", _check_classical),
    ("minimize", _check_minimize),
]


def run_selftest() -> list[tuple[str, bool, str]]:
    out = []
    for name, fn in _SUITES:
        try:
            ok, detail = fn()
        except Exception as exc:
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out
