"""Configuration-driven scenario runner.

Commands: simulate, sweep, spectrum, minimize, selftest.  Scenarios are
TOML files; every float written to CSV/JSON uses 17 significant digits so
post-processing is bit-faithful, and outputs embed the scenario hash and
code version.  Exit codes: 0 ok, 1 invariant failure, 2 configuration
error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import __version__
from .classical_ode import ClassicalState, hamiltonian_drift, solve
from .gausson import (GaussonParams, analytic_constants, exact_free_solution,
                      initial_datum)
from .lattice import GridSpec, l2_norm_sq, make_grid
from .modulation import (fit_modulation, loglog_slope, make_cutoff,
                         run_single, tracking_series)
from .nls_solver import SolverConfig, StepDiagnostics, default_dt, propagate
from .potentials import Potential


class ConfigError(Exception):
    def __init__(self, field_name: str, message: str):
        super().__init__(message)
        self.field_name = field_name


@dataclass(frozen=True)
class Scenario:
    name: str
    N: int
    eps: float | None
    eps_list: tuple[float, ...] | None
    extent: float
    points: int | str
    potential: Potential
    x0: tuple[float, ...]
    v0: tuple[float, ...]
    T: float
    dt: float | str
    seed: int
    n_samples: int
    raw: dict = field(repr=False, default_factory=dict)

    def config_hash(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def resolved_dt(self, eps: float) -> float:
        return default_dt(eps) if self.dt == "auto" else float(self.dt)

    def resolved_points(self, eps: float) -> int:
        if self.points == "auto":
            target = 32.0 * self.extent / eps
            return int(min(2 ** math.ceil(math.log2(target)), 16384))
        return int(self.points)

    def grid(self, eps: float) -> GridSpec:
        return make_grid(self.N, self.extent, self.resolved_points(eps))


def _require(cfg: dict, key: str, typ, where: str = ""):
    if key not in cfg:
        raise ConfigError(where + key, f"missing required field {where}{key!r}")
    val = cfg[key]
    if typ is float and isinstance(val, int):
        val = float(val)
    if not isinstance(val, typ):
        raise ConfigError(where + key,
                          f"field {where}{key!r} has wrong type {type(val).__name__}")
    return val


def build_potential(cfg: dict, N: int) -> Potential:
    kind = _require(cfg, "kind", str, "potential.")
    try:
        return Potential(
            kind=kind,
            amplitude=float(cfg.get("amplitude", 0.0)),
            center=tuple(cfg.get("center", (0.0,) * N)),
            width=float(cfg.get("width", 1.0)),
            wavevector=tuple(cfg.get("wavevector", (1.0,) * N)),
            offset=float(cfg.get("offset", 0.0)),
        )
    except ValueError as exc:
        raise ConfigError("potential.kind", str(exc)) from exc


def parse_scenario(cfg: dict) -> Scenario:
    name = _require(cfg, "name", str)
    N = _require(cfg, "N", int)
    if N not in (1, 2):
        raise ConfigError("N", "N must be 1 or 2")
    eps = cfg.get("eps")
    eps_list = cfg.get("eps_list")
    if eps is None and eps_list is None:
        raise ConfigError("eps", "scenario needs eps or eps_list")
    extent = float(_require(cfg, "extent", (int, float)))
    points = cfg.get("points", "auto")
    if points != "auto" and not isinstance(points, int):
        raise ConfigError("points", "points must be an integer or 'auto'")
    T = float(_require(cfg, "T", (int, float)))
    if T <= 0:
        raise ConfigError("T", "T must be positive")
    dt = cfg.get("dt", "auto")
    if dt != "auto" and not isinstance(dt, (int, float)):
        raise ConfigError("dt", "dt must be a number or 'auto'")
    x0 = tuple(float(v) for v in _require(cfg, "x0", list))
    v0 = tuple(float(v) for v in _require(cfg, "v0", list))
    if len(x0) != N or len(v0) != N:
        raise ConfigError("x0", "x0 and v0 must have N components")
    n_samples = int(cfg.get("n_samples", 11))
    if n_samples < 2:
        raise ConfigError("n_samples", "n_samples must be >= 2")
    pot = build_potential(_require(cfg, "potential", dict), N)
    scen = Scenario(
        name=name, N=N,
        eps=float(eps) if eps is not None else None,
        eps_list=tuple(float(e) for e in eps_list) if eps_list else None,
        extent=extent, points=points, potential=pot, x0=x0, v0=v0, T=T,
        dt=dt if dt == "auto" else float(dt),
        seed=int(cfg.get("seed", 0)),
        n_samples=n_samples,
        raw=cfg,
    )
    validate_scenario(scen)
    return scen


def validate_scenario(scen: Scenario) -> None:
    """Trajectory-in-box rule: the classical path must stay at least a
    quarter-extent away from the periodic boundary."""
    traj = solve(ClassicalState(x=scen.x0, nu=scen.v0, t=0.0),
                 scen.potential, scen.T)
    if traj.sup_position() > scen.extent / 4.0:
        raise ConfigError(
            "extent", f"classical trajectory reaches {traj.sup_position():.3g}, "
            f"beyond a quarter of the box extent {scen.extent:.3g}")


def load_scenario(path: str, overrides: list[str]) -> Scenario:
    try:
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError("config", f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"malformed TOML: {exc}") from exc
    for ov in overrides:
        if "=" not in ov:
            raise ConfigError("override", f"override {ov!r} is not key=value")
        key, _, raw_val = ov.partition("=")
        try:
            val = tomllib.loads(f"v = {raw_val}")["v"]
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(key, f"cannot parse override value {raw_val!r}") from exc
        node = cfg
        parts = key.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = val
    return parse_scenario(cfg)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _meta(scen: Scenario) -> dict:
    return {"scenario": scen.name, "scenario_hash": scen.config_hash(),
            "version": __version__}


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# --- simulate ---------------------------------------------------------------

def cmd_simulate(scen: Scenario, out_dir: str) -> int:
    if scen.eps is None:
        raise ConfigError("eps", "simulate needs a single eps")
    os.makedirs(out_dir, exist_ok=True)
    eps = scen.eps
    grid = scen.grid(eps)
    dt = scen.resolved_dt(eps)
    V = scen.potential

    diag_rows: list[StepDiagnostics] = []
    samples = []
    traj = solve(ClassicalState(x=scen.x0, nu=scen.v0, t=0.0), V, scen.T)
    chi = make_cutoff(traj, box_extent=scen.extent)
    u0 = initial_datum(GaussonParams(eps=eps, x0=scen.x0, v0=scen.v0), grid)
    n_steps = int(round(scen.T / dt))
    record_every = max(1, n_steps // (scen.n_samples - 1))
    cfg = SolverConfig(dt=dt, t_final=scen.T, record_every=record_every)
    u_final = propagate(u0, V, cfg, sink=diag_rows.append,
                        field_sink=lambda t, f: samples.append((t, f)))

    with open(os.path.join(out_dir, "diagnostics.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"# scenario={scen.name} hash={scen.config_hash()} version={__version__}"])
        w.writerow(["t", "Q", "E"] + [f"P{j}" for j in range(scen.N)]
                   + [f"com{j}" for j in range(scen.N)])
        for d in diag_rows:
            w.writerow([_fmt(d.t), _fmt(d.Q), _fmt(d.E)]
                       + [_fmt(p) for p in d.P] + [_fmt(c) for c in d.com])

    ts = tracking_series(samples, V, traj, chi)
    with open(os.path.join(out_dir, "tracking.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"# scenario={scen.name} hash={scen.config_hash()} version={__version__}"])
        w.writerow(["t"] + [f"sigma{j}" for j in range(scen.N)] + ["lambda"]
                   + [f"gamma{j}" for j in range(scen.N)]
                   + ["center_gap", "resid_h1eps", "psi_energy", "psi_mass"])
        for i, t in enumerate(ts.times):
            w.writerow([_fmt(t)] + [_fmt(v) for v in ts.sigma[i]]
                       + [_fmt(ts.lam[i])] + [_fmt(v) for v in ts.gamma[i]]
                       + [_fmt(ts.center_gap[i]), _fmt(ts.resid_h1eps[i]),
                          _fmt(ts.psi_energy[i]), _fmt(ts.psi_mass[i])])

    Q0, E0 = diag_rows[0].Q, diag_rows[0].E
    q_drift = max(abs(d.Q - Q0) / abs(Q0) for d in diag_rows)
    e_drift = max(abs(d.E - E0) / (1.0 + abs(E0)) for d in diag_rows)
    fit = fit_modulation(u_final, traj.at(scen.T).nu, chi)
    summary = {
        **_meta(scen),
        "eps": eps, "dt": dt, "points": scen.resolved_points(eps),
        "mass_scaled": diag_rows[-1].Q,
        "energy_scaled": diag_rows[-1].E,
        "mass_drift_rel": q_drift,
        "energy_drift_rel": e_drift,
        "final_fit": {"y": list(fit.y), "theta": fit.theta,
                      "resid_h1eps": fit.resid_h1eps,
                      "lost_lock": fit.lost_lock},
    }
    if V.kind == "zero":
        ue = exact_free_solution(GaussonParams(eps=eps, x0=scen.x0, v0=scen.v0),
                                 grid, scen.T)
        err = math.sqrt(l2_norm_sq(u_final.with_values(u_final.values - ue.values)))
        summary["exact_l2_error"] = err
    _write_json(os.path.join(out_dir, "summary.json"), summary)
    print(f"simulate {scen.name}: Q drift {q_drift:.3e}, E drift {e_drift:.3e}")
    return 0


# --- sweep ------------------------------------------------------------------

def _sweep_worker(args):
    scen_cfg, eps = args
    scen = parse_scenario(scen_cfg)
    grid = scen.grid(eps)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        samples, traj, chi = run_single(grid, eps, scen.potential, scen.x0,
                                        scen.v0, scen.T,
                                        dt=scen.resolved_dt(eps),
                                        n_samples=scen.n_samples)
    ts = tracking_series(samples, scen.potential, traj, chi)
    return {"eps": eps, "sup_resid": float(ts.resid_h1eps.max()),
            "sup_gap": float(ts.center_gap.max())}


def cmd_sweep(scen: Scenario, out_dir: str, jobs: int) -> int:
    if scen.eps_list is None or len(scen.eps_list) < 3:
        raise ConfigError("eps_list", "sweep needs eps_list with >= 3 values")
    os.makedirs(out_dir, exist_ok=True)
    tasks = [(scen.raw, eps) for eps in scen.eps_list]
    results = {}
    errors = {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {task[1]: pool.submit(_sweep_worker, task)
                       for task in tasks}
        for eps, fut in futures.items():
            exc = fut.exception()
            if exc is None:
                results[eps] = fut.result()
            else:
                errors[eps] = str(exc)
    else:
        for task in tasks:
            try:
                results[task[1]] = _sweep_worker(task)
            except Exception as exc:  # partial failures reported per eps
                errors[task[1]] = str(exc)

    rows = [results[e] for e in scen.eps_list if e in results]
    with open(os.path.join(out_dir, "sweep.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"# scenario={scen.name} hash={scen.config_hash()} version={__version__}"])
        w.writerow(["eps", "sup_resid_h1eps", "sup_center_gap"])
        for r in rows:
            w.writerow([_fmt(r["eps"]), _fmt(r["sup_resid"]), _fmt(r["sup_gap"])])

    verdict: dict = {**_meta(scen), "rows": rows,
                     "errors": {str(k): v for k, v in errors.items()}}
    if scen.potential.kind == "zero":
        verdict["verdict"] = "exact-soliton: residual floor"
    elif len(rows) >= 3:
        slope_resid = loglog_slope([r["eps"] for r in rows],
                                   [r["sup_resid"] for r in rows])
        slope_center = loglog_slope([r["eps"] for r in rows],
                                    [r["sup_gap"] for r in rows])
        ok = slope_resid >= 0.8 and slope_center >= 1.6
        verdict.update({"slope_resid": slope_resid,
                        "slope_center": slope_center,
                        "threshold_resid": 0.8, "threshold_center": 1.6,
                        "verdict": "pass" if ok else "fail"})
    else:
        verdict["verdict"] = "incomplete"
    _write_json(os.path.join(out_dir, "sweep.json"), verdict)
    print(f"sweep {scen.name}: {verdict['verdict']}")
    return 0 if verdict["verdict"] in ("pass", "exact-soliton: residual floor") else 1


# --- spectrum / minimize / selftest ----------------------------------------

def cmd_spectrum(N: int, out_dir: str) -> int:
    from .linearized import build_L, spectrum
    os.makedirs(out_dir, exist_ok=True)
    basis = "finite_difference_1d" if N == 1 else "hermite_tensor"
    payload = {"N": N, "version": __version__}
    for which in ("plus", "minus"):
        rep = spectrum(build_L(which, N, basis=basis), 6)
        payload[f"L_{which}"] = rep.to_dict()
    _write_json(os.path.join(out_dir, "spectrum.json"), payload)
    evals = payload["L_plus"]["eigenvalues"]
    print(f"spectrum N={N}: L+ lowest {['%.6f' % v for v in evals[:4]]}")
    return 0


def cmd_minimize(out_dir: str) -> int:
    from .gausson import profile_R
    from .variational import minimize_energy
    os.makedirs(out_dir, exist_ok=True)
    grid = make_grid(1, 20.0, 512)
    m = analytic_constants(1)["m"]
    R = profile_R(grid)
    x = grid.coords()[0]
    inits = {
        "gausson": R,
        "modulated": R.with_values(R.values * (1 + 0.1 * np.cos(x))),
        "broad": R.with_values(np.exp(-x ** 2 / 8).astype(complex)),
    }
    payload = {"version": __version__, "target_energy": -m}
    ok = True
    for name, init in inits.items():
        res = minimize_energy(init, m)
        payload[name] = {"energy": res.energy, "iterations": res.iterations,
                         "aligned_h1_dist": res.aligned_h1_dist,
                         "converged": res.converged}
        ok = ok and abs(res.energy + m) < 1e-6 * m and res.aligned_h1_dist < 1e-3
    _write_json(os.path.join(out_dir, "minimize.json"), payload)
    print(f"minimize: {'ok' if ok else 'FAILED'} (target {-m:.6f})")
    return 0 if ok else 1


def cmd_selftest(out_dir: str) -> int:
    from .selftest import run_selftest
    os.makedirs(out_dir, exist_ok=True)
    results = run_selftest()
    _write_json(os.path.join(out_dir, "selftest.json"),
                {"version": __version__, "results": results})
    width = max(len(name) for name, _, _ in results)
    n_fail = 0
    for name, ok, detail in results:
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}")
        n_fail += 0 if ok else 1
    print(f"{len(results) - n_fail}/{len(results)} suites passed")
    return 0 if n_fail == 0 else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lognls",
        description="Gausson-dynamics laboratory for the logarithmic NLS")
    parser.add_argument("command",
                        choices=["simulate", "sweep", "spectrum", "minimize",
                                 "selftest"])
    parser.add_argument("--config", help="scenario TOML path")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--dim", type=int, default=1,
                        help="dimension for the spectrum command")
    parser.add_argument("overrides", nargs="*", help="key=value overrides")
    args = parser.parse_intermixed_args(argv)

    out_dir = args.out or os.environ.get("LOGNLS_OUT", "out")
    try:
        if args.command in ("simulate", "sweep"):
            if not args.config:
                raise ConfigError("config", f"{args.command} requires --config")
            scen = load_scenario(args.config, args.overrides)
            out_dir = os.path.join(out_dir, scen.name)
            if args.command == "simulate":
                return cmd_simulate(scen, out_dir)
            return cmd_sweep(scen, out_dir, args.jobs)
        if args.command == "spectrum":
            return cmd_spectrum(args.dim, out_dir)
        if args.command == "minimize":
            return cmd_minimize(out_dir)
        return cmd_selftest(out_dir)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "field": exc.field_name,
                          "message": str(exc)}))
        return 2
    except Exception as exc:  # runtime failure
        print(json.dumps({"error": "runtime", "message": str(exc)}))
        return 3


if __name__ == "__main__":
    sys.exit(main())
