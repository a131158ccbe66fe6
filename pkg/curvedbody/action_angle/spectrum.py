"""
Action spectra: actions at given constants, E = H(J) inversion, fundamental
frequencies and integer degeneracy relations.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from ..errors import BadParams, BracketFailure, NoClassicalRegion, UnboundedMotion
from .quadrature import GRID_POINTS, action_integral, turning_points
from .residue import closed_form_applies, four_region_label, geodetic_remark
from .separable import SeparableSpec, SeparationStage

logger = logging.getLogger(__name__)

N_MAX = 8
RELATION_TOLERANCE = 1e-4
FREQUENCY_STEP = 1e-5
PERTURBATION = 0.01


@dataclass(frozen=True)
class DegeneracyRelation:
    """
    Integer relation n_i nu^i = 0.

    Attributes:
        coefficients (Tuple[int, ...]): n, primitive, first nonzero entry positive
        residual (float): |n . nu| / max |nu|
        persistent (bool): Relation still holds at the perturbed actions
    """
    coefficients: Tuple[int, ...]
    residual: float
    persistent: bool = True

    @property
    def label(self) -> str:
        return "persistent" if self.persistent else "accidental"

    def to_dict(self) -> dict:
        return {"n": list(self.coefficients), "residual": self.residual, "label": self.label}


@dataclass
class ActionSpectrum:
    """
    Actions, energy and frequencies of one separable state.

    Attributes:
        spec (SeparableSpec): Chain at the state's cyclic momenta
        energy (float): E
        actions (Dict[str, float]): J per degree of freedom, in ``spec.action_names`` order
        levels (Dict[str, float]): Separation constants, E included
        frequencies (Dict[str, float]): nu^i = dE/dJ_i
        relations (List[DegeneracyRelation]): Basis of the detected integer relations
        multiplicity (int): Number of independent persistent relations
        region (Optional[str]): Four-region label of the spherical gyroscope
        remark (str): Free-text note carried into reports
    """
    spec: SeparableSpec
    energy: float
    actions: Dict[str, float]
    levels: Dict[str, float]
    frequencies: Dict[str, float] = field(default_factory=dict)
    relations: List[DegeneracyRelation] = field(default_factory=list)
    multiplicity: int = 0
    region: Optional[str] = None
    remark: str = ""

    @property
    def names(self) -> Tuple[str, ...]:
        return self.spec.action_names

    @property
    def action_vector(self) -> np.ndarray:
        return np.array([self.actions[name] for name in self.names])

    @property
    def circular(self) -> Dict[str, float]:
        """omega^i = 2 pi nu^i."""
        return {name: 2.0 * math.pi * nu for name, nu in self.frequencies.items()}

    def period(self, name: str) -> float:
        return 1.0 / self.frequencies[name]

    @property
    def degenerate(self) -> bool:
        return self.multiplicity > 0

    def to_dict(self) -> dict:
        return {
            "scenario": self.spec.scenario,
            "chain": self.spec.chain or None,
            "energy": self.energy,
            "constants": dict(self.spec.constants),
            "levels": dict(self.levels),
            "actions": dict(self.actions),
            "frequencies": dict(self.frequencies),
            "circular_frequencies": self.circular,
            "relations": [rel.to_dict() for rel in self.relations],
            "multiplicity": self.multiplicity,
            "region": self.region,
            "remark": self.remark,
        }


def _is_energy_stage(spec: SeparableSpec, stage: SeparationStage) -> bool:
    return stage is spec.stages[-1]


def stage_minimum(stage: SeparationStage, levels: Dict[str, float], margin: float = 1e-9) -> Tuple[float, float, bool]:
    """
    Minimum of the effective potential of a stage.

    Returns:
        Tuple[float, float, bool]: (q*, U(q*), True when the infimum sits at an open end)
    """
    a, b = stage.interval
    if stage.periodic:
        grid = np.linspace(a, b, GRID_POINTS, endpoint=False)
    else:
        grid = np.linspace(a + margin, b - margin, GRID_POINTS)
    U = np.array([stage.effective(q, levels) for q in grid], dtype=float)
    U[~np.isfinite(U)] = np.inf
    k = int(np.argmin(U))
    if not np.isfinite(U[k]):
        raise NoClassicalRegion(f"effective potential of stage {stage.name} is infinite everywhere")
    if not stage.periodic and k in (0, len(grid) - 1):
        return float(grid[k]), float(U[k]), True
    lo = grid[k - 1] if k > 0 else grid[k] - (grid[1] - grid[0])
    hi = grid[k + 1] if k < len(grid) - 1 else grid[k] + (grid[1] - grid[0])
    res = minimize_scalar(lambda q: stage.effective(q, levels), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13})
    if res.fun <= U[k]:
        return float(res.x), float(res.fun), False
    return float(grid[k]), float(U[k]), False


def stage_action(spec: SeparableSpec, stage: SeparationStage, levels: Dict[str, float],
                 value: Optional[float] = None) -> float:
    """
    Action of one stage at the given separation constants.

    Raises:
        NoClassicalRegion: Level below the effective-potential minimum
        UnboundedMotion: Open stage, unless ``allow_unbounded`` is set for an internal stage
    """
    p2 = stage.integrand(levels, value)
    try:
        tp = turning_points(p2, stage.interval, margin=spec.margin, periodic=stage.periodic)
    except UnboundedMotion:
        if spec.allow_unbounded and not _is_energy_stage(spec, stage):
            logger.warning("stage %s is unbounded; reporting an infinite action", stage.name)
            return math.inf
        raise
    return action_integral(p2, tp)


def actions_at(spec: SeparableSpec, energy: float, levels: Optional[Dict[str, float]] = None) -> ActionSpectrum:
    """
    Actions of every degree of freedom at a given energy and separation constants.

    Args:
        spec (SeparableSpec): Separation chain
        energy (float): E
        levels (Optional[Dict[str, float]]): Internal constants (C_x, C_y or A, C)

    Returns:
        ActionSpectrum: Spectrum without frequencies
    """
    lv = dict(levels or {})
    missing = [name for name in spec.internal_levels if name not in lv]
    if missing:
        raise BadParams(f"{spec.scenario} ({spec.chain or 'single stage'}) needs separation constants {missing}")
    lv["E"] = float(energy)
    actions = {st.name: stage_action(spec, st, lv) for st in spec.stages}
    actions.update(spec.cyclic_actions)
    return ActionSpectrum(spec=spec, energy=float(energy), actions=actions, levels=lv)


def _bracket_above(g, lo: float, scale: float, stage: SeparationStage) -> float:
    step = 0.1 * scale
    for _ in range(80):
        hi = lo + step
        try:
            if g(hi) > 0.0:
                return hi
        except UnboundedMotion as exc:
            raise BracketFailure(f"target action of stage {stage.name} exceeds the bounded regime") from exc
        step *= 2.0
    raise BracketFailure(f"no upper bracket for stage {stage.name}")


def invert_stage(spec: SeparableSpec, stage: SeparationStage, levels: Dict[str, float], target: float) -> float:
    """
    Stage level at which the stage action equals ``target``.

    The action grows monotonically with the level on each branch; on a
    periodic coordinate the librating branch is preferred when it can
    reach the target, otherwise the rotational branch is used.

    Raises:
        BracketFailure: Target not reachable by a bounded orbit
    """
    if not math.isfinite(target) or target < 0.0:
        raise BadParams(f"action of stage {stage.name} must be finite and non-negative, got {target}")
    _, u_min, open_end = stage_minimum(stage, levels, spec.margin)
    if open_end:
        raise BracketFailure(f"stage {stage.name} has no bounded orbits (effective potential decreases to the interval end)")
    if target == 0.0:
        return u_min
    scale = max(1.0, abs(u_min))

    def g(v):
        return stage_action(spec, stage, levels, value=v) - target

    lo = u_min
    if stage.periodic:
        a, b = stage.interval
        grid = np.linspace(a, b, GRID_POINTS, endpoint=False)
        u_max = float(np.max([stage.effective(q, levels) for q in grid]))
        delta = 1e-9 * max(1.0, abs(u_max))
        if u_max - delta > u_min and g(u_max - delta) >= 0.0:
            hi = u_max - delta
        else:
            lo = u_max + delta
            hi = lo if g(lo) > 0.0 else _bracket_above(g, lo, scale, stage)
            if hi == lo:
                return lo
    else:
        hi = _bracket_above(g, lo, scale, stage)
    return brentq(g, lo, hi, xtol=1e-13 * max(1.0, abs(hi)), rtol=1e-14, maxiter=300)


def invert_energy(spec: SeparableSpec, targets: Dict[str, float]) -> ActionSpectrum:
    """
    Energy and separation constants from action values.

    Cyclic actions set the momentum constants. The remaining stages are
    inverted in elimination order, each by one-dimensional root finding.

    Args:
        spec (SeparableSpec): Separation chain (its constants are overridden by cyclic targets)
        targets (Dict[str, float]): J per action name

    Returns:
        ActionSpectrum: Spectrum at the reconstructed state

    Raises:
        BracketFailure: A stage target lies outside the bounded regime
    """
    constants = spec.constants_from_actions(targets)
    if constants:
        spec = spec.with_constants(**constants)
    levels: Dict[str, float] = {}
    for stage in spec.stages:
        if stage.name not in targets:
            raise BadParams(f"missing target action for {stage.name}")
        value = invert_stage(spec, stage, levels, float(targets[stage.name]))
        levels[stage.level] = value + sum(levels[name] for name in stage.offsets)
        logger.debug("stage %s: %s = %.15g", stage.name, stage.level, levels[stage.level])
    actions = {st.name: float(targets[st.name]) for st in spec.stages}
    actions.update(spec.cyclic_actions)
    spectrum = ActionSpectrum(spec=spec, energy=levels["E"], actions=actions, levels=levels)
    _annotate(spectrum)
    return spectrum


def energy_of_actions(spec: SeparableSpec, J: Sequence[float]) -> float:
    """E = H(J) with J ordered as ``spec.action_names``."""
    return invert_energy(spec, dict(zip(spec.action_names, J))).energy


def _annotate(spectrum: ActionSpectrum) -> None:
    spec = spectrum.spec
    if closed_form_applies(spec):
        spectrum.region = four_region_label(spectrum.actions["phi"], spectrum.actions["psi"])
        spectrum.remark = geodetic_remark(spec)


def frequencies(spec: SeparableSpec, J: Sequence[float], rel_step: float = FREQUENCY_STEP) -> np.ndarray:
    """nu^i = dE/dJ_i by central differences with step rel_step * max(|J_i|, 1e-3 max|J|)."""
    J = np.asarray(J, dtype=float)
    if not np.all(np.isfinite(J)):
        raise BadParams("frequencies need finite actions")
    floor = 1e-3 * max(float(np.max(np.abs(J))), 1e-12)
    nu = np.zeros(J.size)
    for i in range(J.size):
        h = rel_step * max(abs(J[i]), floor)
        up, down = J.copy(), J.copy()
        up[i] += h
        down[i] -= h
        if down[i] < 0.0 and i < len(spec.stages):
            # librating actions are non-negative: one-sided difference
            nu[i] = (energy_of_actions(spec, up) - energy_of_actions(spec, J)) / h
            continue
        nu[i] = (energy_of_actions(spec, up) - energy_of_actions(spec, down)) / (2.0 * h)
    return nu


def integer_relations(nu: Sequence[float], n_max: int = N_MAX, tolerance: float = RELATION_TOLERANCE) -> List[DegeneracyRelation]:
    """
    All primitive integer vectors with |n_i| <= n_max and |n . nu| < tolerance * max|nu|.

    The coefficient of the largest frequency is solved for, the others are
    enumerated exhaustively.
    """
    nu = np.asarray(nu, dtype=float)
    d = nu.size
    scale = float(np.max(np.abs(nu)))
    if scale == 0.0:
        return [DegeneracyRelation(tuple(int(k == i) for k in range(d)), 0.0) for i in range(d)]
    pivot = int(np.argmax(np.abs(nu)))
    others = [k for k in range(d) if k != pivot]
    side = 2 * n_max + 1
    grid = np.indices((side,) * (d - 1)).reshape(d - 1, -1).T - n_max
    partial = grid @ nu[others]
    n_pivot = np.rint(-partial / nu[pivot])
    residual = np.abs(partial + n_pivot * nu[pivot]) / scale
    hits = (np.abs(n_pivot) <= n_max) & (residual < tolerance)
    full = np.zeros((int(np.count_nonzero(hits)), d), dtype=np.int64)
    full[:, others] = grid[hits]
    full[:, pivot] = n_pivot[hits].astype(np.int64)
    res = residual[hits]

    found: Dict[Tuple[int, ...], float] = {}
    for n, r in zip(full, res):
        if not np.any(n):
            continue
        g = int(np.gcd.reduce(np.abs(n)))
        n = n // g
        if n[np.flatnonzero(n)[0]] < 0:
            n = -n
        key = tuple(int(v) for v in n)
        found[key] = min(found.get(key, math.inf), float(abs(n @ nu) / scale))
    return [DegeneracyRelation(key, r) for key, r in found.items()]


def relation_basis(relations: List[DegeneracyRelation]) -> List[DegeneracyRelation]:
    """Shortest relations that are linearly independent, chosen greedily."""
    ordered = sorted(relations, key=lambda rel: (sum(abs(c) for c in rel.coefficients), rel.coefficients))
    basis: List[DegeneracyRelation] = []
    rows: List[Tuple[int, ...]] = []
    for rel in ordered:
        trial = np.array(rows + [rel.coefficients], dtype=float)
        if np.linalg.matrix_rank(trial) > len(rows):
            rows.append(rel.coefficients)
            basis.append(rel)
    return basis


def frequencies_and_degeneracy(
    spectrum: ActionSpectrum,
    n_max: int = N_MAX,
    tolerance: float = RELATION_TOLERANCE,
    rel_step: float = FREQUENCY_STEP,
    perturbation: float = PERTURBATION,
) -> ActionSpectrum:
    """
    Fill in the frequencies and the degeneracy relations of a spectrum.

    A relation found at J is re-tested at J * (1 + perturbation); if it
    fails there it is labelled accidental and does not count towards the
    multiplicity.

    Args:
        spectrum (ActionSpectrum): Spectrum from ``invert_energy`` or ``actions_at``
        n_max (int): Largest integer coefficient searched
        tolerance (float): Relative residual accepted for a relation
        rel_step (float): Relative finite-difference step on J
        perturbation (float): Relative shift of J for the persistence test

    Returns:
        ActionSpectrum: The same object, updated
    """
    spec = spectrum.spec
    J = spectrum.action_vector
    nu = frequencies(spec, J, rel_step)
    spectrum.frequencies = dict(zip(spectrum.names, nu.tolist()))

    basis = relation_basis(integer_relations(nu, n_max, tolerance))
    if basis:
        nu_shift = frequencies(spec, J * (1.0 + perturbation), rel_step)
        scale = max(float(np.max(np.abs(nu_shift))), 1e-300)
        basis = [
            DegeneracyRelation(rel.coefficients, rel.residual,
                               abs(float(np.dot(rel.coefficients, nu_shift))) / scale < tolerance)
            for rel in basis
        ]
    spectrum.relations = basis
    spectrum.multiplicity = sum(1 for rel in basis if rel.persistent)
    if spectrum.region is None:
        _annotate(spectrum)
    logger.info("%s: frequencies %s, %d-fold degenerate", spec.scenario,
                np.array2string(nu, precision=6), spectrum.multiplicity)
    return spectrum


def trajectory_action(times: np.ndarray, q: np.ndarray, p: np.ndarray, cyclic: bool = False) -> float:
    """
    Action measured along an integrated trajectory.

    A cyclic coordinate gives 2 pi times the time-averaged momentum. A
    librating coordinate gives the loop integral of p dq per cycle,
    between the first and last upward crossings of its mid level.
    """
    times = np.asarray(times, dtype=float)
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    if cyclic:
        mean = 0.5 * np.sum((p[1:] + p[:-1]) * np.diff(times)) / (times[-1] - times[0])
        return 2.0 * math.pi * float(mean)
    s = q - 0.5 * (np.max(q) + np.min(q))
    ups = [i for i in range(len(s) - 1) if s[i] < 0.0 <= s[i + 1]]
    if len(ups) < 2:
        raise BadParams("trajectory covers less than one full cycle")
    i0, i1 = ups[0], ups[-1]
    loop = float(np.sum(0.5 * (p[i0 + 1:i1 + 1] + p[i0:i1]) * np.diff(q[i0:i1 + 1])))
    return abs(loop) / (len(ups) - 1)
