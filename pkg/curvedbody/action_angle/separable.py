"""
Separation chains of the built-in scenarios.

After the cyclic momenta are fixed (l = p_phi, s = p_psi for gyroscopes,
s = p_alpha, j = p_beta for affine bodies) the Hamilton-Jacobi equation
splits into one-dimensional stages. Each stage is

    p_q^2 = scale(q) * (level - U(q; earlier constants))

and its separation constant is fixed by its own action. Stages are kept
in elimination order: the internal (x, y) or (eps, rho) stages first,
the translational stage last, whose level is the energy minus the
internal constants.

Affine bodies use gamma = alpha + beta, delta = alpha - beta, so that
p_gamma = (s + j)/2 and p_delta = (s - j)/2.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

from ..dynamics.inertia import InertiaSpec
from ..dynamics.potentials import PotentialSpec
from ..dynamics.scenarios import base_profile
from ..errors import BadParams, UnsupportedForce

logger = logging.getLogger(__name__)

SEPARABLE_SCENARIOS = (
    "sphere_point",
    "pseudosphere_point",
    "sphere_gyro",
    "pseudosphere_gyro",
    "pseudosphere_gyro_lorentz",
    "torus_gyro",
    "sphere_affine_xy",
    "sphere_affine_polar",
    "pseudosphere_affine",
    "torus_affine",
)

CHAINS = ("xy", "polar")

# cyclic action name -> momentum constant
_CYCLIC = {
    "point": (("phi", "l"),),
    "gyro": (("phi", "l"), ("psi", "s")),
    "affine": (("phi", "l"), ("alpha", "s"), ("beta", "j")),
}

_RADIAL_KINDS = ("zero", "sphere_oscillator", "sphere_kepler", "pseudo_oscillator", "pseudo_kepler",
                 "control_power", "cos_poly", "tabulated")
_XY_KINDS = ("separable_rxy",)
_POLAR_KINDS = ("separable_polar", "canonical_2d_elastic")


@dataclass(frozen=True)
class SeparationStage:
    """
    One separated degree of freedom.

    Attributes:
        name (str): Coordinate label, also the action label
        level (str): Separation constant fixed by this stage's action
        interval (Tuple[float, float]): Search interval (one period if periodic)
        scale (Callable): q -> positive factor in front of (level - U)
        effective (Callable): (q, levels) -> effective potential U
        periodic (bool): Angle-like coordinate
        offsets (Tuple[str, ...]): Constants subtracted from ``level`` before use
    """
    name: str
    level: str
    interval: Tuple[float, float]
    scale: Callable[[float], float]
    effective: Callable[[float, Dict[str, float]], float]
    periodic: bool = False
    offsets: Tuple[str, ...] = ()

    def level_value(self, levels: Dict[str, float]) -> float:
        return levels[self.level] - sum(levels[name] for name in self.offsets)

    def integrand(self, levels: Dict[str, float], value: Optional[float] = None) -> Callable[[float], float]:
        """q -> p_q^2 at the given constants; ``value`` overrides the stage level."""
        lvl = self.level_value(levels) if value is None else value

        def p2(q: float) -> float:
            return self.scale(q) * (lvl - self.effective(q, levels))

        return p2


@dataclass
class SeparableSpec:
    """
    A separable scenario at fixed cyclic momenta.

    Attributes:
        scenario (str): One of SEPARABLE_SCENARIOS
        inertia (InertiaSpec): Mass and internal inertia
        potential (PotentialSpec): Potential energy
        constants (Dict[str, float]): Cyclic momenta l, s, j (as applicable)
        R (float): Chart radius (tube radius for the torus)
        L (float): Torus centre-line radius
        chain (str): "xy" or "polar" for affine scenarios
        radial_extent (float): Upper end of the pseudosphere radial interval, in units of R
        internal_extent (float): Upper end of the x, y and rho intervals
        margin (float): Distance kept from non-periodic interval ends
        allow_unbounded (bool): Report infinite actions for open internal stages
    """
    scenario: str
    inertia: InertiaSpec
    potential: PotentialSpec = field(default_factory=PotentialSpec)
    constants: Dict[str, float] = field(default_factory=dict)
    R: float = 1.0
    L: float = 2.0
    chain: str = ""
    radial_extent: float = 30.0
    internal_extent: float = 20.0
    margin: float = 1e-9
    allow_unbounded: bool = False
    stages: List[SeparationStage] = field(init=False, repr=False)

    def __post_init__(self):
        if self.scenario not in SEPARABLE_SCENARIOS:
            raise BadParams(f"scenario {self.scenario!r} is not separable; allowed: {', '.join(SEPARABLE_SCENARIOS)}")
        if self.family == "affine":
            if not self.chain:
                self.chain = "polar" if self.scenario == "sphere_affine_polar" else "xy"
            if self.chain not in CHAINS:
                raise BadParams(f"unknown separation chain {self.chain!r}; allowed: {', '.join(CHAINS)}")
        else:
            self.chain = ""
        missing = [c for _, c in _CYCLIC[self.family] if c not in self.constants]
        if missing:
            raise BadParams(f"{self.scenario} needs cyclic constants {missing}")
        self.constants = {k: float(v) for k, v in self.constants.items()}
        self._check_potential()
        self.stages = self._build()

    @property
    def family(self) -> str:
        if self.scenario.endswith("_point"):
            return "point"
        if "_gyro" in self.scenario:
            return "gyro"
        return "affine"

    @property
    def base(self) -> str:
        return self.scenario.split("_", 1)[0]

    @property
    def cyclic_actions(self) -> Dict[str, float]:
        """J = 2 pi * momentum constant for every cyclic coordinate."""
        return {name: 2.0 * math.pi * self.constants[c] for name, c in _CYCLIC[self.family]}

    @property
    def action_names(self) -> Tuple[str, ...]:
        return tuple(st.name for st in self.stages) + tuple(name for name, _ in _CYCLIC[self.family])

    @property
    def internal_levels(self) -> Tuple[str, ...]:
        return tuple(st.level for st in self.stages[:-1])

    def with_constants(self, **constants: float) -> "SeparableSpec":
        merged = dict(self.constants)
        merged.update(constants)
        return replace(self, constants=merged)

    def constants_from_actions(self, actions: Dict[str, float]) -> Dict[str, float]:
        """Cyclic momenta from their actions, J / 2 pi."""
        return {c: actions[name] / (2.0 * math.pi) for name, c in _CYCLIC[self.family] if name in actions}

    def _check_potential(self) -> None:
        kind = self.potential.kind
        if self.family != "affine":
            if kind not in _RADIAL_KINDS:
                raise UnsupportedForce(f"potential {kind} does not separate for {self.scenario}")
            return
        allowed = _RADIAL_KINDS + (_XY_KINDS if self.chain == "xy" else _POLAR_KINDS)
        if kind not in allowed:
            raise UnsupportedForce(f"potential {kind} does not separate in the {self.chain} chain")

    def _build(self) -> List[SeparationStage]:
        m, I = self.inertia.m, self.inertia.I
        l = self.constants["l"]
        s = self.constants.get("s", 0.0)
        j = self.constants.get("j", 0.0)
        V = self.potential
        prof = base_profile(self.base, self.R, self.L, self.margin)
        if self.base == "sphere":
            interval, periodic = (0.0, math.pi * self.R), False
        elif self.base == "pseudosphere":
            interval, periodic = (0.0, self.radial_extent * self.R), False
        else:
            interval, periodic = (-math.pi, math.pi), True

        family = self.family
        lorentz = self.scenario.endswith("_lorentz")
        spin_energy = 0.0
        if family == "gyro":
            spin_energy = (-1.0 if lorentz else 1.0) * s * s / (2.0 * I)
        drift_charge = 0.0 if family == "point" else s

        def radial_U(q, levels):
            w = prof.w(q)
            return V.radial_profile(q) + (l - prof.drift(q) * drift_charge) ** 2 / (2.0 * m * w * w) + spin_energy

        radial_scale = 2.0 * m * prof.g_rr

        if family != "affine":
            return [SeparationStage(prof.label, "E", interval, lambda q: radial_scale, radial_U, periodic)]

        a, b = 0.5 * (s + j), 0.5 * (s - j)
        two_I = 2.0 * I
        extent = self.internal_extent
        if self.chain == "xy":
            x_stage = SeparationStage(
                "x", "C_x", (0.0, extent), lambda q: two_I,
                lambda q, lv: V.x_profile(q) + a * a / (two_I * q * q))
            y_stage = SeparationStage(
                "y", "C_y", (0.0, extent), lambda q: two_I,
                lambda q, lv: V.y_profile(q) + b * b / (two_I * q * q))
            r_stage = SeparationStage(prof.label, "E", interval, lambda q: radial_scale, radial_U, periodic,
                                      offsets=("C_x", "C_y"))
            return [x_stage, y_stage, r_stage]

        eps_upper = 0.25 * math.pi if self._eps_singular() else 0.5 * math.pi

        def eps_U(q, lv):
            s2 = math.sin(2.0 * q)
            return V.eps_profile(q) + (s * s + j * j + 2.0 * s * j * math.cos(2.0 * q)) / (two_I * s2 * s2)

        eps_stage = SeparationStage("eps", "A", (0.0, eps_upper), lambda q: two_I, eps_U)
        rho_stage = SeparationStage(
            "rho", "C", (0.0, extent), lambda q: two_I,
            lambda q, lv: V.rho_profile(q) + lv["A"] / (q * q))
        r_stage = SeparationStage(prof.label, "E", interval, lambda q: radial_scale, radial_U, periodic,
                                  offsets=("C",))
        return [eps_stage, rho_stage, r_stage]

    def _eps_singular(self) -> bool:
        kind = self.potential.kind
        nu = float(self.potential.params.get("nu", 0.0))
        return kind == "canonical_2d_elastic" or (kind == "separable_polar" and nu != 0.0)


def separable_spec(
    scenario: str,
    inertia: InertiaSpec,
    potential: Optional[PotentialSpec] = None,
    R: float = 1.0,
    L: float = 2.0,
    chain: str = "",
    allow_unbounded: bool = False,
    **constants: float,
) -> SeparableSpec:
    """
    Build the separation chain of a scenario.

    Args:
        scenario (str): One of SEPARABLE_SCENARIOS
        inertia (InertiaSpec): Mass and internal inertia
        potential (Optional[PotentialSpec]): Potential; zero when omitted
        R (float): Radius
        L (float): Torus centre-line radius
        chain (str): "xy" or "polar" for affine bodies
        allow_unbounded (bool): Permit open internal stages
        **constants: Cyclic momenta l, s, j

    Returns:
        SeparableSpec: The chain
    """
    potential = potential or PotentialSpec(R=R)
    spec = SeparableSpec(scenario=scenario, inertia=inertia, potential=potential, constants=constants,
                         R=R, L=L, chain=chain, allow_unbounded=allow_unbounded)
    logger.debug("separation chain for %s: %s", scenario, [st.name for st in spec.stages])
    return spec
