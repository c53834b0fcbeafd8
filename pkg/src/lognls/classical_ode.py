"""Velocity-Verlet integration of the Newtonian system xdot = nu,
nudot = -grad V(x), with Hamiltonian-drift certification."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .functionals import classical_hamiltonian
from .potentials import Potential


@dataclass(frozen=True)
class ClassicalState:
    """Phase-space point (x, nu) at time t."""

    x: tuple[float, ...]
    nu: tuple[float, ...]
    t: float = 0.0

    def __post_init__(self):
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.nu))
                and np.isfinite(self.t)):
            raise ValueError("non-finite classical state")


def hamiltonian(s: ClassicalState, V: Potential) -> float:
    return classical_hamiltonian(s.x, s.nu, V)


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled classical trajectory."""

    states: tuple[ClassicalState, ...]

    def __post_init__(self):
        ts = np.array([s.t for s in self.states])
        if len(ts) > 1:
            dts = np.diff(ts)
            if np.any(dts <= 0):
                raise ValueError("times must be strictly increasing")
            if np.max(np.abs(dts - dts[0])) > 1e-12:
                raise ValueError("non-uniform time step")

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    def sup_position(self) -> float:
        return max(float(np.linalg.norm(s.x)) for s in self.states)

    def at(self, t: float) -> ClassicalState:
        """Linear interpolation in time (the ODE is oversampled, so this is
        well below the Verlet error)."""
        ts = self.times
        if t <= ts[0]:
            return self.states[0]
        if t >= ts[-1]:
            return self.states[-1]
        i = int(np.searchsorted(ts, t) - 1)
        s0, s1 = self.states[i], self.states[i + 1]
        w = (t - s0.t) / (s1.t - s0.t)
        x = tuple((1 - w) * a + w * b for a, b in zip(s0.x, s1.x))
        nu = tuple((1 - w) * a + w * b for a, b in zip(s0.nu, s1.nu))
        return ClassicalState(x=x, nu=nu, t=t)

    def write_csv(self, path, V: Potential) -> None:
        dim = len(self.states[0].x)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"x{j}" for j in range(dim)]
                       + [f"nu{j}" for j in range(dim)] + ["H"])
            for s in self.states:
                w.writerow([f"{s.t:.17g}"] + [f"{v:.17g}" for v in s.x]
                           + [f"{v:.17g}" for v in s.nu]
                           + [f"{hamiltonian(s, V):.17g}"])


def step_verlet(s: ClassicalState, V: Potential, dt: float) -> ClassicalState:
    """One kick-drift-kick velocity-Verlet step (2nd order, symplectic)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    x = np.asarray(s.x, dtype=float)
    nu = np.asarray(s.nu, dtype=float)
    nu_half = nu - 0.5 * dt * V.grad(x)
    x_new = x + dt * nu_half
    nu_new = nu_half - 0.5 * dt * V.grad(x_new)
    return ClassicalState(x=tuple(x_new), nu=tuple(nu_new), t=s.t + dt)


def solve(s0: ClassicalState, V: Potential, T: float, dt: float = 1e-4) -> Trajectory:
    """Integrate on [t0, t0 + T] with uniform step dt."""
    if T <= 0 or dt <= 0:
        raise ValueError("T and dt must be positive")
    n_steps = int(round(T / dt))
    states = [s0]
    s = s0
    for k in range(n_steps):
        s = step_verlet(s, V, dt)
        if not (np.all(np.isfinite(s.x)) and np.all(np.isfinite(s.nu))):
            raise RuntimeError(f"non-finite state at step {k}")
        # pin t to the uniform ladder to avoid accumulation drift
        s = ClassicalState(x=s.x, nu=s.nu, t=s0.t + (k + 1) * dt)
        states.append(s)
    return Trajectory(states=tuple(states))


def hamiltonian_drift(traj: Trajectory, V: Potential) -> float:
    """Max relative Hamiltonian deviation over the trajectory."""
    H0 = hamiltonian(traj.states[0], V)
    return max(abs(hamiltonian(s, V) - H0) / (1.0 + abs(H0)) for s in traj.states)
