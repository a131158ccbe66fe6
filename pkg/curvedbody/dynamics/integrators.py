"""
Trajectory integration of the canonical equations with conservation monitoring.

Two one-step methods are provided: classical RK4 and the implicit
midpoint rule solved by fixed-point iteration. On request the midpoint
step is followed by a projection back onto the initial energy level along
the Hamiltonian gradient restricted to non-cyclic components, which leaves
cyclic momenta untouched. The projection is off by default; when it is on,
the energy row of the conservation report carries the largest error a
step made before projection, so it still measures the integrator.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..errors import BadParams, SingularPoint, StepIntoSingularity
from ..su2.momenta import s3_momentum_pair
from .hamiltonian import (
    PhaseState,
    PotentialLike,
    effective_cyclic,
    energy_function,
    vector_field,
)
from .scenarios import ConfigMetric

logger = logging.getLogger(__name__)

METHODS = ("rk4", "implicit_midpoint")

Field = Callable[[np.ndarray], np.ndarray]


def rk4_step(f: Field, z: np.ndarray, dt: float) -> np.ndarray:
    """One classical Runge-Kutta step."""
    k1 = f(z)
    k2 = f(z + 0.5 * dt * k1)
    k3 = f(z + 0.5 * dt * k2)
    k4 = f(z + dt * k3)
    return z + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@dataclass
class StepStats:
    """
    Iteration counters of the implicit solver.

    Attributes:
        iterations (int): Total fixed-point iterations
        capped (int): Steps that hit the iteration cap
        projections (int): Energy projections applied
        unprojected_drift (float): Largest energy error of a step before its projection,
            relative to |H0| when that is nonzero
    """
    iterations: int = 0
    capped: int = 0
    projections: int = 0
    unprojected_drift: float = 0.0


def implicit_midpoint_step(
    f: Field,
    z: np.ndarray,
    dt: float,
    tol: float = 1e-12,
    max_iter: int = 100,
    stats: Optional[StepStats] = None,
) -> np.ndarray:
    """
    One implicit midpoint step z1 = z + dt f((z + z1)/2) by fixed-point iteration.

    Args:
        f (Field): Vector field
        z (np.ndarray): Current state
        dt (float): Step
        tol (float): Relative update tolerance
        max_iter (int): Iteration cap
        stats (Optional[StepStats]): Counters to update

    Returns:
        np.ndarray: Next state
    """
    z1 = z + dt * f(z)
    for it in range(1, max_iter + 1):
        z_new = z + dt * f(0.5 * (z + z1))
        delta = np.max(np.abs(z_new - z1))
        z1 = z_new
        if delta <= tol * max(1.0, np.max(np.abs(z1))):
            break
    else:
        if stats is not None:
            stats.capped += 1
        logger.warning("implicit midpoint fixed-point iteration hit its cap (%d)", max_iter)
    if stats is not None:
        stats.iterations += it
    logger.debug("implicit midpoint converged in %d iterations", it)
    return z1


def energy_projection(
    H: Callable[[np.ndarray], float],
    f: Field,
    z: np.ndarray,
    H0: float,
    frozen: Sequence[int],
    sweeps: int = 3,
) -> np.ndarray:
    """
    Move z onto the level H = H0 along the masked gradient of H.

    The gradient is (-dp/dt, dq/dt) read off the vector field; entries in
    ``frozen`` are zeroed so those components are left bit-exact.
    """
    n = z.size // 2
    for _ in range(sweeps):
        err = H(z) - H0
        if abs(err) <= 1e-16 * max(1.0, abs(H0)):
            break
        rate = f(z)
        grad = np.concatenate([-rate[n:], rate[:n]])
        grad[list(frozen)] = 0.0
        norm2 = float(grad @ grad)
        if norm2 == 0.0:
            break
        z = z - (err / norm2) * grad
    return z


@dataclass
class TrajectoryPoint:
    """A sample of the trajectory."""
    t: float
    q: np.ndarray
    p: np.ndarray
    energy: float


@dataclass
class ConservationRow:
    """
    One monitored quantity.

    Attributes:
        quantity (str): Label
        initial (float): Value at t = 0
        final (float): Value at the last sample
        max_drift (float): max |x(t) - x(0)|, relative to |x(0)| when that is nonzero
    """
    quantity: str
    initial: float
    final: float
    max_drift: float


@dataclass
class Trajectory:
    """
    Integrated trajectory with its conservation report.

    Attributes:
        metric (ConfigMetric): Scenario metric
        points (List[TrajectoryPoint]): Samples
        method (str): Integrator name
        dt (float): Step
        steps (int): Steps actually taken
        partial (bool): True when integration stopped at a singular locus
        stats (StepStats): Solver counters
        wall_time (float): Seconds spent
        conservation (List[ConservationRow]): Monitored quantities
        constraint_residuals (Dict[str, float]): Constraint residual maxima
    """
    metric: ConfigMetric
    points: List[TrajectoryPoint] = field(default_factory=list)
    method: str = "implicit_midpoint"
    dt: float = 0.0
    steps: int = 0
    partial: bool = False
    stats: StepStats = field(default_factory=StepStats)
    wall_time: float = 0.0
    conservation: List[ConservationRow] = field(default_factory=list)
    constraint_residuals: Dict[str, float] = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return np.array([pt.t for pt in self.points])

    @property
    def q(self) -> np.ndarray:
        return np.array([pt.q for pt in self.points])

    @property
    def p(self) -> np.ndarray:
        return np.array([pt.p for pt in self.points])

    @property
    def energy(self) -> np.ndarray:
        return np.array([pt.energy for pt in self.points])

    def columns(self) -> List[str]:
        labels = list(self.metric.coordinates)
        return ["t"] + labels + [f"p_{c}" for c in labels] + ["E"]

    def export_trajectory_data(self) -> List[dict]:
        """Samples as a list of row dictionaries."""
        names = self.columns()
        return [
            dict(zip(names, [pt.t, *pt.q.tolist(), *pt.p.tolist(), pt.energy]))
            for pt in self.points
        ]

    def to_frame(self) -> pd.DataFrame:
        data = np.column_stack([self.times, self.q, self.p, self.energy])
        return pd.DataFrame(data, columns=self.columns())

    def drift(self, quantity: str) -> float:
        for row in self.conservation:
            if row.quantity == quantity:
                return row.max_drift
        raise KeyError(quantity)


def _row(name: str, series: np.ndarray) -> ConservationRow:
    x0 = float(series[0])
    dev = float(np.max(np.abs(series - x0)))
    return ConservationRow(name, x0, float(series[-1]), dev / abs(x0) if abs(x0) > 1e-12 else dev)


def _monitor(traj: Trajectory, potential: PotentialLike) -> None:
    metric = traj.metric
    q, p = traj.q, traj.p
    energy = _row("E", traj.energy)
    if traj.stats.projections:
        energy.max_drift = max(energy.max_drift, traj.stats.unprojected_drift)
    rows = [energy]
    for i in effective_cyclic(metric, potential):
        rows.append(_row(f"p_{metric.coordinates[i]}", p[:, i]))
    if metric.scenario == "s3_gyro":
        R = metric.chart.params["R"]
        pairs = [s3_momentum_pair(qi, pi, metric.m, metric.inertia.I, R) for qi, pi in zip(q, p)]
        S = np.array([pair.S for pair in pairs])
        S_rl = np.array([pair.S_rl for pair in pairs])
        c = 0.5 * R * S + S_rl
        rows.append(_row("|S|", np.linalg.norm(S, axis=1)))
        rows.append(_row("|S_rl|", np.linalg.norm(S_rl, axis=1)))
        for k in range(3):
            rows.append(_row(f"c{k + 1}", c[:, k]))
    traj.conservation = rows
    if metric.body_fn is not None and metric.inertia.mode == "gyroscopic":
        residual = 0.0
        for qi in q:
            phi = metric.body(qi, np.zeros_like(qi)).phi
            residual = max(residual, float(np.max(np.abs(phi.T @ phi - np.eye(phi.shape[0])))))
        traj.constraint_residuals["orthogonality"] = residual


def integrate(
    state0: PhaseState,
    metric: ConfigMetric,
    potential: PotentialLike = None,
    method: str = "implicit_midpoint",
    dt: float = 1e-3,
    steps: int = 1000,
    output_every: int = 1,
    projection: bool = False,
    tol: float = 1e-12,
) -> Trajectory:
    """
    Integrate the canonical equations of a scenario.

    Args:
        state0 (PhaseState): Initial state
        metric (ConfigMetric): Scenario metric
        potential (PotentialLike): Potential energy
        method (str): "rk4" or "implicit_midpoint"
        dt (float): Time step
        steps (int): Number of steps
        output_every (int): Sampling stride
        projection (bool): Project implicit midpoint steps onto the energy level; the
            energy drift then reports the pre-projection error
        tol (float): Relative fixed-point tolerance of the implicit midpoint step

    Returns:
        Trajectory: Samples and conservation report

    Raises:
        StepIntoSingularity: The trajectory entered a singular-locus margin;
            the partial trajectory is attached to the exception
    """
    if method not in METHODS:
        raise BadParams(f"unknown integrator {method!r}; allowed: {', '.join(METHODS)}")
    if not dt > 0.0:
        raise BadParams(f"dt must be positive, got {dt}")
    if steps < 0 or output_every < 1:
        raise BadParams("steps must be >= 0 and output_every >= 1")
    metric.check(state0.q)
    n = metric.dim
    f = vector_field(metric, potential)
    H = energy_function(metric, potential)
    frozen = [n + i for i in effective_cyclic(metric, potential)]
    z = state0.z
    H0 = H(z)
    scale = abs(H0) if abs(H0) > 1e-12 else 1.0
    traj = Trajectory(metric=metric, method=method, dt=dt)
    traj.points.append(TrajectoryPoint(state0.t, z[:n].copy(), z[n:].copy(), H0))
    logger.info("integrating %s with %s: dt=%s steps=%d", metric.scenario, method, dt, steps)
    start = time.perf_counter()
    for step in range(1, steps + 1):
        try:
            if method == "rk4":
                z_next = rk4_step(f, z, dt)
            else:
                z_next = implicit_midpoint_step(f, z, dt, tol=tol, stats=traj.stats)
                if projection:
                    err = abs(H(z_next) - H0)
                    traj.stats.unprojected_drift = max(traj.stats.unprojected_drift, err / scale)
                    z_next = energy_projection(H, f, z_next, H0, frozen)
                    traj.stats.projections += 1
            metric.check(z_next[:n])
        except SingularPoint as exc:
            traj.partial = True
            traj.steps = step - 1
            traj.wall_time = time.perf_counter() - start
            _monitor(traj, potential)
            logger.warning("integration stopped after %d steps: %s", step - 1, exc)
            raise StepIntoSingularity(str(exc), trajectory=traj) from exc
        z = z_next
        if step % output_every == 0 or step == steps:
            traj.points.append(TrajectoryPoint(state0.t + step * dt, z[:n].copy(), z[n:].copy(), H(z)))
    traj.steps = steps
    traj.wall_time = time.perf_counter() - start
    _monitor(traj, potential)
    logger.info("finished %s: energy drift %.3e", metric.scenario, traj.conservation[0].max_drift)
    return traj


def radial_period(traj: Trajectory, index: int = 0) -> float:
    """
    Mean period of a coordinate from its successive upward mean crossings.

    Crossing times are linearly interpolated between samples.
    """
    t = traj.times
    x = traj.q[:, index]
    level = 0.5 * (np.max(x) + np.min(x))
    s = x - level
    crossings = [
        t[i] - s[i] * (t[i + 1] - t[i]) / (s[i + 1] - s[i])
        for i in range(len(s) - 1)
        if s[i] < 0.0 <= s[i + 1]
    ]
    if len(crossings) < 2:
        return math.nan
    return float((crossings[-1] - crossings[0]) / (len(crossings) - 1))
