"""
Orbit-closure test for central potentials on the sphere and pseudosphere.

For a structure-less point with angular momentum l, the azimuth swept in
one radial period is

    dphi = 2 * integral of l / (w(r)^2 p_r) dr,   p_r^2 = 2m (E - V - l^2 / (2m w^2))

between the turning points. An orbit closes when dphi / 2 pi is a
rational p/q with a small denominator. On both curved spaces the
oscillator and Kepler potentials close every bounded orbit; other radial
powers do not.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..dynamics.hamiltonian import PhaseState
from ..dynamics.inertia import InertiaSpec
from ..dynamics.integrators import integrate
from ..dynamics.potentials import PotentialSpec
from ..dynamics.scenarios import base_profile, config_metric
from ..errors import BadParams, UnboundedMotion
from .quadrature import TurningPoints, inverse_root_integral, turning_points
from .separable import separable_spec
from .spectrum import stage_minimum

logger = logging.getLogger(__name__)

BERTRAND_KINDS = {
    "sphere": ("sphere_oscillator", "sphere_kepler"),
    "pseudosphere": ("pseudo_oscillator", "pseudo_kepler"),
}
CONTROL_KINDS = ("control_power",)
METHODS = ("quadrature", "trajectory")

MAX_DENOMINATOR = 4
CLOSURE_TOLERANCE = 1e-6
CONTROL_FAILURE_FRACTION = 0.8


@dataclass(frozen=True)
class ClosureSample:
    """
    One sampled orbit.

    Attributes:
        energy (float): E
        l (float): Angular momentum
        turning (Tuple[float, float]): Peri- and apocentre
        ratio (float): dphi / 2 pi over one radial period
        period (float): Radial period
        closed (bool): Ratio within tolerance of p/q with q <= MAX_DENOMINATOR
        fraction (Optional[Tuple[int, int]]): (p, q) when closed
    """
    energy: float
    l: float
    turning: Tuple[float, float]
    ratio: float
    period: float
    closed: bool
    fraction: Optional[Tuple[int, int]] = None

    def to_dict(self) -> dict:
        return {
            "E": self.energy, "l": self.l, "r_min": self.turning[0], "r_max": self.turning[1],
            "ratio": self.ratio, "period": self.period, "closed": self.closed,
            "fraction": None if self.fraction is None else f"{self.fraction[0]}/{self.fraction[1]}",
        }


@dataclass
class ClosureReport:
    """
    Closure statistics of one (chart, potential) pair.

    Attributes:
        chart (str): sphere2 or pseudosphere2
        potential (str): Potential kind
        method (str): "quadrature" or "trajectory"
        seed (int): Sampling seed
        samples (List[ClosureSample]): Sampled orbits
        bertrand (bool): Potential is expected to close every orbit
    """
    chart: str
    potential: str
    method: str
    seed: int
    samples: List[ClosureSample] = field(default_factory=list)
    bertrand: bool = True

    @property
    def closed_fraction(self) -> float:
        if not self.samples:
            return 0.0
        return sum(1 for s in self.samples if s.closed) / len(self.samples)

    @property
    def passed(self) -> bool:
        if self.bertrand:
            return bool(self.samples) and self.closed_fraction == 1.0
        return 1.0 - self.closed_fraction >= CONTROL_FAILURE_FRACTION

    def to_dict(self) -> dict:
        return {
            "chart": self.chart,
            "potential": self.potential,
            "method": self.method,
            "seed": self.seed,
            "bertrand": self.bertrand,
            "closed_fraction": self.closed_fraction,
            "passed": self.passed,
            "samples": [s.to_dict() for s in self.samples],
        }


def rational_closure(ratio: float, max_denominator: int = MAX_DENOMINATOR,
                     tolerance: float = CLOSURE_TOLERANCE) -> Optional[Tuple[int, int]]:
    """Smallest-denominator p/q within ``tolerance`` of ``ratio``, or None."""
    for q in range(1, max_denominator + 1):
        p = round(ratio * q)
        if abs(ratio - p / q) <= tolerance:
            return int(p), q
    return None


def _base_name(chart: str) -> str:
    base = chart[:-1] if chart.endswith("2") else chart
    if base not in BERTRAND_KINDS:
        raise BadParams(f"orbit closure is defined on sphere2 and pseudosphere2, got {chart!r}")
    return base


class _Orbit:
    """Radial stage of a point particle with the closure integrals."""

    def __init__(self, base: str, potential: PotentialSpec, inertia: InertiaSpec, R: float, l: float):
        self.base = base
        self.m = inertia.m
        self.l = l
        self.R = R
        self.profile = base_profile(base, R, 2.0 * R, 1e-9)
        spec = separable_spec(f"{base}_point", inertia, potential, R=R, l=l)
        stage = spec.stages[0]
        if base == "sphere" and potential.kind != "sphere_kepler":
            # tg(r/R) profiles are confined to the upper hemisphere
            stage = replace(stage, interval=(0.0, 0.5 * math.pi * R))
        self.stage = stage
        self.q_min, self.u_min, _ = stage_minimum(stage, {})
        self.threshold = math.inf if base == "sphere" else stage.effective(stage.interval[1], {})

    def turning(self, energy: float) -> Tuple[TurningPoints, Callable[[float], float]]:
        p2 = self.stage.integrand({"E": energy})
        return turning_points(p2, self.stage.interval, margin=1e-9, hint=self.q_min), p2

    def closure(self, energy: float) -> Tuple[TurningPoints, float, float]:
        """(turning points, dphi, radial period)."""
        tp, p2 = self.turning(energy)
        dphi = inverse_root_integral(lambda r: self.l / self.profile.w(r) ** 2, p2, tp)
        period = inverse_root_integral(lambda r: self.m, p2, tp)
        return tp, dphi, period


def _trajectory_sweep(orbit: _Orbit, inertia: InertiaSpec, potential: PotentialSpec,
                      tp: TurningPoints, period: float, steps_per_period: int) -> float:
    """Azimuth swept between successive pericentres of an RK4 trajectory."""
    metric = config_metric(f"{orbit.base}_point", inertia, R=orbit.R)
    dt = period / steps_per_period
    state = PhaseState([tp.lower, 0.0], [0.0, orbit.l])
    traj = integrate(state, metric, potential, method="rk4", dt=dt, steps=int(1.1 * steps_per_period))
    t, q, p = traj.times, traj.q, traj.p
    pr = p[:, 0]
    start = steps_per_period // 4
    for i in range(start, len(pr) - 1):
        if pr[i] < 0.0 <= pr[i + 1]:
            window = slice(max(i - 2, 0), min(i + 3, len(pr)))
            tt = t[window] - t[i]
            roots = np.roots(np.polyfit(tt, pr[window], 3))
            real = [r.real for r in roots if abs(r.imag) < 1e-12 and tt[0] <= r.real <= tt[-1]]
            t_star = min(real, key=lambda r: abs(r - 0.5 * dt)) if real else -pr[i] * dt / (pr[i + 1] - pr[i])
            return float(np.polyval(np.polyfit(tt, q[window, 1], 3), t_star))
    raise UnboundedMotion("no return to pericentre within 1.1 radial periods")


def _sample_points(orbit_for, potential: PotentialSpec, rng: np.random.Generator, n: int):
    points = []
    attempts = 0
    while len(points) < n:
        attempts += 1
        if attempts > 50 * n:
            raise BadParams(f"could not sample bounded orbits for {potential.kind}")
        l = float(rng.uniform(0.5, 1.5))
        orbit = orbit_for(l)
        cap = orbit.threshold if math.isfinite(orbit.threshold) else orbit.u_min + abs(orbit.u_min) + 1.0
        if not cap > orbit.u_min:
            continue
        points.append((orbit.u_min + float(rng.uniform(0.05, 0.6)) * (cap - orbit.u_min), l))
    return points


def bertrand_closure(
    chart: str,
    potential: PotentialSpec,
    samples: int = 20,
    seed: int = 0,
    method: str = "quadrature",
    threads: int = 1,
    inertia: Optional[InertiaSpec] = None,
    points: Optional[Sequence[Tuple[float, float]]] = None,
    steps_per_period: int = 4000,
) -> ClosureReport:
    """
    Measure orbit closure over sampled (E, l).

    Args:
        chart (str): sphere2 or pseudosphere2
        potential (PotentialSpec): Central potential
        samples (int): Number of random orbits when ``points`` is not given
        seed (int): Sampling seed
        method (str): "quadrature" (azimuth integral) or "trajectory" (RK4 between pericentres)
        threads (int): Worker threads
        inertia (Optional[InertiaSpec]): Particle mass; m = 1 when omitted
        points (Optional[Sequence]): Explicit (E, l) pairs
        steps_per_period (int): Trajectory resolution

    Returns:
        ClosureReport: Per-sample ratios and the pass/fail verdict

    Raises:
        UnboundedMotion: An explicit energy lies above the bounded regime
    """
    if method not in METHODS:
        raise BadParams(f"unknown closure method {method!r}; allowed: {', '.join(METHODS)}")
    base = _base_name(chart)
    expected = BERTRAND_KINDS[base]
    if potential.kind not in expected + CONTROL_KINDS:
        raise BadParams(f"closure on {chart} takes {', '.join(expected + CONTROL_KINDS)}, got {potential.kind}")
    chart_name = f"{base}2"
    potential = replace(potential, chart=chart_name)
    R = potential.R
    inertia = inertia or InertiaSpec(m=1.0, I=1.0, mode="gyroscopic")

    def orbit_for(l):
        return _Orbit(base, potential, inertia, R, l)

    rng = np.random.default_rng(seed)
    pairs = list(points) if points is not None else _sample_points(orbit_for, potential, rng, samples)

    def one(pair):
        energy, l = pair
        orbit = orbit_for(l)
        if energy >= orbit.threshold:
            raise UnboundedMotion(f"E={energy} is above the bounded-orbit threshold {orbit.threshold:.6g}")
        tp, dphi, period = orbit.closure(energy)
        if method == "trajectory":
            dphi = _trajectory_sweep(orbit, inertia, potential, tp, period, steps_per_period)
        ratio = dphi / (2.0 * math.pi)
        fraction = rational_closure(ratio)
        return ClosureSample(energy, l, (tp.lower, tp.upper), ratio, period, fraction is not None, fraction)

    logger.info("closure test %s / %s: %d orbits by %s", chart_name, potential.kind, len(pairs), method)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, pairs))
    else:
        results = [one(pair) for pair in pairs]
    report = ClosureReport(chart_name, potential.kind, method, seed, results,
                           bertrand=potential.kind in expected)
    logger.info("closed fraction %.2f (%s)", report.closed_fraction, "pass" if report.passed else "fail")
    return report
