"""
Potential energies of the built-in scenarios.

A ``PotentialSpec`` knows its translational profile V_r along the radial
coordinate of a chart (r on the sphere and pseudosphere, theta on the
torus) and, for deformable bodies, its internal part in either the
(x, y) or the (rho, eps) variables. Scenario coordinates are mapped onto
these roles by ``PotentialSpec.evaluate``.

Supported kinds:
- zero
- sphere_oscillator(kappa): (kappa/2) R^2 tg^2(r/R)
- sphere_kepler(alpha): -(alpha/R) ctg(r/R)
- pseudo_oscillator(kappa): (kappa/2) R^2 th^2(r/R)
- pseudo_kepler(alpha): -(alpha/R) cth(r/R)
- control_power(kappa, power): (kappa/2) R^2 tg^p or th^p, a non-closing control
- cos_poly(alpha_hat, beta_hat): (alpha_hat cos^2 + beta_hat cos) / sin^2 of r/R
- separable_sphere(kappa, nu): sphere oscillator plus nu sin^2(phi) / (R^2 sin^2(r/R))
- separable_rxy(kappa_x, kappa_y): kappa_x x^2/2 + kappa_y y^2/2 (+ radial)
- separable_polar(kappa, nu): kappa rho^2/2 + nu / (rho^2 cos 2eps) (+ radial)
- canonical_2d_elastic(kappa): separable_polar with nu = 2 kappa
- tabulated(r, v): monotone cubic interpolation of a radial table
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from ..errors import BadParams, UnsupportedForce

logger = logging.getLogger(__name__)

POTENTIAL_KINDS = (
    "zero",
    "sphere_oscillator",
    "sphere_kepler",
    "pseudo_oscillator",
    "pseudo_kepler",
    "control_power",
    "cos_poly",
    "separable_sphere",
    "separable_rxy",
    "separable_polar",
    "canonical_2d_elastic",
    "tabulated",
)

_REQUIRED = {
    "sphere_oscillator": ("kappa",),
    "sphere_kepler": ("alpha",),
    "pseudo_oscillator": ("kappa",),
    "pseudo_kepler": ("alpha",),
    "control_power": ("kappa",),
    "cos_poly": ("alpha_hat", "beta_hat"),
    "separable_sphere": ("kappa", "nu"),
    "separable_rxy": ("kappa_x", "kappa_y"),
    "separable_polar": ("kappa",),
    "canonical_2d_elastic": ("kappa",),
    "tabulated": ("r", "v"),
}

_INTERNAL_KINDS = ("separable_rxy", "separable_polar", "canonical_2d_elastic")


@dataclass
class PotentialSpec:
    """
    Potential energy description.

    Attributes:
        kind (str): One of POTENTIAL_KINDS
        params (Dict): Parameters of the kind
        radial (Optional[PotentialSpec]): Translational part of a separable internal potential
        R (float): Chart radius used by the trigonometric profiles
        chart (str): Chart name, selects tg vs th for control_power
    """
    kind: str = "zero"
    params: Dict = field(default_factory=dict)
    radial: Optional["PotentialSpec"] = None
    R: float = 1.0
    chart: str = "sphere2"

    def __post_init__(self):
        if self.kind not in POTENTIAL_KINDS:
            raise BadParams(f"unknown potential kind {self.kind!r}; allowed: {', '.join(POTENTIAL_KINDS)}")
        missing = [k for k in _REQUIRED.get(self.kind, ()) if k not in self.params]
        if missing:
            raise BadParams(f"potential {self.kind} needs parameters {missing}")
        if self.kind == "tabulated":
            r = np.asarray(self.params["r"], dtype=float)
            v = np.asarray(self.params["v"], dtype=float)
            if r.ndim != 1 or r.shape != v.shape or r.size < 2 or np.any(np.diff(r) <= 0.0):
                raise BadParams("tabulated potential needs increasing r and matching v")
            self._table = PchipInterpolator(r, v, extrapolate=False)
            self._table_range = (float(r[0]), float(r[-1]))
        if self.radial is not None and self.kind not in _INTERNAL_KINDS:
            raise BadParams(f"potential {self.kind} takes no radial part")

    @property
    def is_internal(self) -> bool:
        return self.kind in _INTERNAL_KINDS

    def _p(self, name: str, default: float = 0.0) -> float:
        return float(self.params.get(name, default))

    def radial_profile(self, r: float) -> float:
        """Translational part V_r at radial coordinate r."""
        R = self.R
        kind = self.kind
        if kind == "zero":
            return 0.0
        if kind in _INTERNAL_KINDS:
            return 0.0 if self.radial is None else self.radial.radial_profile(r)
        if kind in ("sphere_oscillator", "separable_sphere"):
            return 0.5 * self._p("kappa") * R * R * math.tan(r / R) ** 2
        if kind == "sphere_kepler":
            return -self._p("alpha") / (R * math.tan(r / R))
        if kind == "pseudo_oscillator":
            return 0.5 * self._p("kappa") * R * R * math.tanh(r / R) ** 2
        if kind == "pseudo_kepler":
            return -self._p("alpha") / (R * math.tanh(r / R))
        if kind == "control_power":
            base = math.tanh(r / R) if self.chart == "pseudosphere2" else math.tan(r / R)
            return 0.5 * self._p("kappa") * R * R * base ** self._p("power", 3.0)
        if kind == "cos_poly":
            c = math.cos(r / R)
            return (self._p("alpha_hat") * c * c + self._p("beta_hat") * c) / math.sin(r / R) ** 2
        if kind == "tabulated":
            lo, hi = self._table_range
            if not lo <= r <= hi:
                raise BadParams(f"tabulated potential evaluated at r={r} outside [{lo}, {hi}]")
            return float(self._table(r))
        raise UnsupportedForce(f"potential {kind} has no radial profile")

    def angular_profile(self, phi: float) -> float:
        """V_phi of the separable sphere class (zero otherwise)."""
        if self.kind != "separable_sphere":
            return 0.0
        return self._p("nu") * math.sin(phi) ** 2

    def x_profile(self, x: float) -> float:
        if self.kind == "separable_rxy":
            return 0.5 * self._p("kappa_x") * x * x
        return 0.0

    def y_profile(self, y: float) -> float:
        if self.kind == "separable_rxy":
            return 0.5 * self._p("kappa_y") * y * y
        return 0.0

    def rho_profile(self, rho: float) -> float:
        if self.kind in ("separable_polar", "canonical_2d_elastic"):
            return 0.5 * self._p("kappa") * rho * rho
        return 0.0

    def eps_profile(self, eps: float) -> float:
        """V_eps such that the internal potential is V_rho(rho) + V_eps(eps) / rho^2."""
        if self.kind == "canonical_2d_elastic":
            return 2.0 * self._p("kappa") / math.cos(2.0 * eps)
        if self.kind == "separable_polar":
            nu = self._p("nu")
            return nu / math.cos(2.0 * eps) if nu else 0.0
        return 0.0

    def internal(self, x: float, y: float) -> float:
        """Internal potential as a function of the (x, y) deformation variables."""
        if self.kind == "separable_rxy":
            return self.x_profile(x) + self.y_profile(y)
        if self.kind in ("separable_polar", "canonical_2d_elastic"):
            rho = math.hypot(x, y)
            return self.rho_profile(rho) + self.eps_profile(math.atan2(x, y)) / (rho * rho)
        return 0.0

    def evaluate(self, q: Sequence[float], roles: Dict[str, int], R_sin: Optional[Callable] = None) -> float:
        """
        Potential at scenario coordinates.

        Args:
            q: Generalized coordinates
            roles (Dict[str, int]): Index of "radial", "angle", "x"/"y" or "rho"/"eps" in q
            R_sin (Optional[Callable]): Profile w(r) used by the separable sphere class

        Returns:
            float: V(q)
        """
        V = self.radial_profile(q[roles["radial"]]) if "radial" in roles else 0.0
        if self.kind == "separable_sphere" and "angle" in roles:
            w = R_sin(q[roles["radial"]]) if R_sin else self.R * math.sin(q[roles["radial"]] / self.R)
            V += self.angular_profile(q[roles["angle"]]) / (w * w)
        if self.is_internal:
            if "x" in roles:
                x, y = q[roles["x"]], q[roles["y"]]
            elif "rho" in roles:
                rho, eps = q[roles["rho"]], q[roles["eps"]]
                x, y = rho * math.sin(eps), rho * math.cos(eps)
            else:
                raise UnsupportedForce(f"potential {self.kind} needs internal deformation coordinates")
            V += self.internal(x, y)
        return V


def potential_from_dict(data: Dict, R: float = 1.0, chart: str = "sphere2") -> PotentialSpec:
    """
    Build a PotentialSpec from a config mapping.

    Args:
        data (Dict): Mapping with ``kind`` plus parameters, optionally ``radial``
        R (float): Chart radius
        chart (str): Chart name

    Returns:
        PotentialSpec: The potential
    """
    data = dict(data or {"kind": "zero"})
    kind = data.pop("kind", "zero")
    radial = data.pop("radial", None)
    radial_spec = potential_from_dict(radial, R, chart) if radial else None
    return PotentialSpec(kind=kind, params=data, radial=radial_spec, R=R, chart=chart)
