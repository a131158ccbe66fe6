"""
Configuration metrics of the built-in scenarios.

Every scenario exposes the reduced metric G-breve = G / m on its
generalized coordinates, so that T = (m/2) G-breve_ij dq^i dq^j and
H = (1/2m) G-breve^ij p_i p_j + V. A scenario also knows how to rebuild
the body (base point, internal configuration phi and their rates) from
(q, dq/dt), which feeds the co-moving evaluation of the same energy.

Coordinate orders:
- sphere_point, pseudosphere_point: (r, phi)
- sphere_gyro, pseudosphere_gyro, pseudosphere_gyro_lorentz: (r, phi, psi)
- torus_gyro: (theta, phi, psi)
- sphere_affine_xy, pseudosphere_affine: (r, phi, gamma, delta, x, y)
- torus_affine: (theta, phi, gamma, delta, x, y)
- sphere_affine_polar: (r, phi, gamma, delta, rho, eps)
- s3_gyro: (r1, r2, r3, k1, k2, k3)
- generic: (x^i, phi^A_B row-major) on any chart with a frame field
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from ..errors import BadParams, SingularMetric, SingularPoint
from ..frames.fields import FrameField, aholonomic_connection, builtin_frame, sphere3_coframe
from ..frames.kinematics import rotation2
from ..geometry.charts import ManifoldChart, pseudosphere2, sphere2, sphere3, torus2
from ..geometry.connection import ConnectionField, levi_civita_connection
from ..numdiff import jacobian
from ..su2.groups import exp_so3, hat, left_jacobian
from .inertia import InertiaSpec

logger = logging.getLogger(__name__)

SCENARIOS = (
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
    "s3_gyro",
    "generic",
)

_J2 = np.array([[0.0, -1.0], [1.0, 0.0]])


@dataclass
class BodyKinematics:
    """
    Body rebuilt from generalized coordinates and velocities.

    Attributes:
        base_point (np.ndarray): Coordinates on the base chart
        base_velocity (np.ndarray): dx/dt
        phi (np.ndarray): Internal configuration
        phi_dot (np.ndarray): d phi/dt
    """
    base_point: np.ndarray
    base_velocity: np.ndarray
    phi: np.ndarray
    phi_dot: np.ndarray


@dataclass
class ConfigMetric:
    """
    Kinetic metric of a scenario.

    Attributes:
        scenario (str): Scenario name
        coordinates (Tuple[str, ...]): Generalized coordinate labels
        metric_fn (Callable): q -> G-breve
        inertia (InertiaSpec): Mass and internal inertia
        chart (ManifoldChart): Base chart
        frame (Optional[FrameField]): Reference frame on the base chart
        connection (Optional[ConnectionField]): Connection of the base chart
        signature (str): "riemannian" or "lorentz_type"
        cyclic (Tuple[int, ...]): Indices of cyclic coordinates
        roles (Dict[str, int]): Coordinate roles for potentials
        domain_fn (Optional[Callable]): q -> reason string when inadmissible
        body_fn (Optional[Callable]): (q, qdot) -> BodyKinematics
        sampling_box (Tuple): Box for random admissible coordinates
        metric_derivative_fn (Optional[Callable]): q -> dG-breve[i, j, k] in closed form
    """
    scenario: str
    coordinates: Tuple[str, ...]
    metric_fn: Callable[[np.ndarray], np.ndarray]
    inertia: InertiaSpec
    chart: ManifoldChart
    frame: Optional[FrameField] = None
    connection: Optional[ConnectionField] = None
    signature: str = "riemannian"
    cyclic: Tuple[int, ...] = ()
    roles: Dict[str, int] = field(default_factory=dict)
    domain_fn: Optional[Callable[[np.ndarray], Optional[str]]] = None
    body_fn: Optional[Callable[[np.ndarray, np.ndarray], BodyKinematics]] = None
    sampling_box: Tuple[Tuple[float, float], ...] = ()
    metric_derivative_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None

    @property
    def dim(self) -> int:
        return len(self.coordinates)

    @property
    def m(self) -> float:
        return self.inertia.m

    def check(self, q) -> np.ndarray:
        """Validate generalized coordinates; raises SingularPoint near excluded loci."""
        q = np.asarray(q, dtype=float)
        if q.shape != (self.dim,):
            raise BadParams(f"{self.scenario} expects {self.dim} coordinates, got shape {q.shape}")
        if self.domain_fn is not None:
            reason = self.domain_fn(q)
            if reason:
                raise SingularPoint(f"{self.scenario}: {reason} at {q.tolist()}")
        return q

    def G(self, q) -> np.ndarray:
        """G-breve_ij at q."""
        return np.asarray(self.metric_fn(self.check(q)), dtype=float)

    def dG(self, q) -> np.ndarray:
        """dG-breve_ij/dq^k with the derivative index last; central differences when no closed form is known."""
        q = self.check(q)
        if self.metric_derivative_fn is not None:
            return np.asarray(self.metric_derivative_fn(q), dtype=float)
        return jacobian(lambda y: np.asarray(self.metric_fn(y), dtype=float), q)

    def G_inv(self, q) -> np.ndarray:
        G = self.G(q)
        if abs(np.linalg.det(G)) < 1e-300 or np.linalg.cond(G) > 1e14:
            raise SingularMetric(f"{self.scenario}: configuration metric not invertible at {np.asarray(q).tolist()}")
        return np.linalg.inv(G)

    def vol_density(self, q) -> float:
        """sqrt |det G-breve|."""
        return math.sqrt(abs(np.linalg.det(self.G(q))))

    def body(self, q, qdot) -> BodyKinematics:
        if self.body_fn is None:
            raise BadParams(f"{self.scenario} has no co-moving body description")
        return self.body_fn(self.check(q), np.asarray(qdot, dtype=float))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        lo = np.array([b[0] for b in self.sampling_box])
        hi = np.array([b[1] for b in self.sampling_box])
        return rng.uniform(lo, hi)


@dataclass(frozen=True)
class BaseProfile:
    """
    Radial profile of a 2-D base: g = diag(g_rr, w^2), drift rate coefficient d.

    ``dw`` and ``ddrift`` are the radial derivatives of w and d.
    """
    chart: ManifoldChart
    g_rr: float
    w: Callable[[float], float]
    drift: Callable[[float], float]
    radial_box: Tuple[float, float]
    label: str
    dw: Callable[[float], float]
    ddrift: Callable[[float], float]


def base_profile(kind: str, R: float, L: float, margin: float) -> BaseProfile:
    if kind == "sphere":
        return BaseProfile(sphere2(R, margin), 1.0, lambda r: R * math.sin(r / R), lambda r: math.cos(r / R),
                           (0.1 * math.pi * R, 0.9 * math.pi * R), "r",
                           lambda r: math.cos(r / R), lambda r: -math.sin(r / R) / R)
    if kind == "pseudosphere":
        return BaseProfile(pseudosphere2(R, margin), 1.0, lambda r: R * math.sinh(r / R), lambda r: math.cosh(r / R),
                           (0.1 * R, 2.0 * R), "r",
                           lambda r: math.cosh(r / R), lambda r: math.sinh(r / R) / R)
    if kind == "torus":
        return BaseProfile(torus2(L, R, margin), R * R, lambda t: L + R * math.cos(t), math.sin,
                           (-math.pi, math.pi), "theta",
                           lambda t: -R * math.sin(t), math.cos)
    raise BadParams(f"unknown base {kind!r}")


def _point(base: BaseProfile, inertia: InertiaSpec, name: str, margin: float) -> ConfigMetric:
    def metric(q):
        w = base.w(q[0])
        return np.diag([base.g_rr, w * w])

    def metric_derivative(q):
        dG = np.zeros((2, 2, 2))
        dG[1, 1, 0] = 2.0 * base.w(q[0]) * base.dw(q[0])
        return dG

    return ConfigMetric(
        scenario=name, coordinates=(base.label, "phi"), metric_fn=metric, inertia=inertia,
        metric_derivative_fn=metric_derivative,
        chart=base.chart, frame=builtin_frame(base.chart), connection=levi_civita_connection(base.chart),
        cyclic=(1,), roles={"radial": 0, "angle": 1},
        domain_fn=_radial_domain(base, margin),
        sampling_box=(base.radial_box, (-math.pi, math.pi)),
    )


def _radial_domain(base: BaseProfile, margin: float):
    def domain(q):
        return base.chart.domain_fn(q[:2], margin) if base.chart.domain_fn else None
    return domain


def _gyro(base: BaseProfile, inertia: InertiaSpec, name: str, margin: float, lorentz: bool = False) -> ConfigMetric:
    k = inertia.I / inertia.m
    sign = -1.0 if lorentz else 1.0

    def metric(q):
        w, d = base.w(q[0]), base.drift(q[0])
        return np.array([
            [base.g_rr, 0.0, 0.0],
            [0.0, w * w + sign * k * d * d, sign * k * d],
            [0.0, sign * k * d, sign * k],
        ])

    def metric_derivative(q):
        w, d = base.w(q[0]), base.drift(q[0])
        dw, dd = base.dw(q[0]), base.ddrift(q[0])
        dG = np.zeros((3, 3, 3))
        dG[1, 1, 0] = 2.0 * (w * dw + sign * k * d * dd)
        dG[1, 2, 0] = dG[2, 1, 0] = sign * k * dd
        return dG

    def body(q, qdot):
        phi = rotation2(q[2])
        return BodyKinematics(q[:2], qdot[:2], phi, qdot[2] * _J2 @ phi)

    return ConfigMetric(
        scenario=name, coordinates=(base.label, "phi", "psi"), metric_fn=metric, inertia=inertia,
        metric_derivative_fn=metric_derivative,
        chart=base.chart, frame=builtin_frame(base.chart), connection=levi_civita_connection(base.chart),
        signature="lorentz_type" if lorentz else "riemannian",
        cyclic=(1, 2), roles={"radial": 0, "angle": 1},
        domain_fn=_radial_domain(base, margin),
        body_fn=None if lorentz else body,
        sampling_box=(base.radial_box, (-math.pi, math.pi), (-math.pi, math.pi)),
    )


def two_polar_phi(alpha: float, beta: float, lam: float, mu: float) -> np.ndarray:
    """phi = rot(alpha) diag(lambda, mu) rot(-beta)."""
    return rotation2(alpha) @ np.diag([lam, mu]) @ rotation2(-beta)


def _affine(base: BaseProfile, inertia: InertiaSpec, name: str, margin: float, polar: bool = False) -> ConfigMetric:
    k = inertia.I / inertia.m
    sqrt2 = math.sqrt(2.0)

    def xy(q):
        if polar:
            return q[4] * math.sin(q[5]), q[4] * math.cos(q[5])
        return q[4], q[5]

    def metric(q):
        w, d = base.w(q[0]), base.drift(q[0])
        x, y = xy(q)
        G = np.zeros((6, 6))
        G[0, 0] = base.g_rr
        G[1, 1] = w * w + k * d * d * (x * x + y * y)
        G[1, 2] = G[2, 1] = k * d * x * x
        G[1, 3] = G[3, 1] = k * d * y * y
        G[2, 2] = k * x * x
        G[3, 3] = k * y * y
        G[4, 4] = k
        G[5, 5] = k * q[4] ** 2 if polar else k
        return G

    def squares_derivative(q):
        # d(x^2)/dq and d(y^2)/dq, nonzero only in the last two slots
        dx2, dy2 = np.zeros(6), np.zeros(6)
        if polar:
            rho, s, c = q[4], math.sin(q[5]), math.cos(q[5])
            dx2[4], dx2[5] = 2.0 * rho * s * s, 2.0 * rho * rho * s * c
            dy2[4], dy2[5] = 2.0 * rho * c * c, -2.0 * rho * rho * s * c
        else:
            dx2[4], dy2[5] = 2.0 * q[4], 2.0 * q[5]
        return dx2, dy2

    def metric_derivative(q):
        w, d = base.w(q[0]), base.drift(q[0])
        dw, dd = base.dw(q[0]), base.ddrift(q[0])
        x, y = xy(q)
        dx2, dy2 = squares_derivative(q)
        dG = np.zeros((6, 6, 6))
        dG[1, 1] = k * d * d * (dx2 + dy2)
        dG[1, 1, 0] += 2.0 * (w * dw + k * d * dd * (x * x + y * y))
        dG[1, 2] = k * d * dx2
        dG[1, 2, 0] += k * dd * x * x
        dG[1, 3] = k * d * dy2
        dG[1, 3, 0] += k * dd * y * y
        dG[2, 1], dG[3, 1] = dG[1, 2], dG[1, 3]
        dG[2, 2] = k * dx2
        dG[3, 3] = k * dy2
        if polar:
            dG[5, 5, 4] = 2.0 * k * q[4]
        return dG

    def body(q, qdot):
        x, y = xy(q)
        if polar:
            s, c = math.sin(q[5]), math.cos(q[5])
            xdot = qdot[4] * s + q[4] * c * qdot[5]
            ydot = qdot[4] * c - q[4] * s * qdot[5]
        else:
            xdot, ydot = qdot[4], qdot[5]
        alpha, beta = 0.5 * (q[2] + q[3]), 0.5 * (q[2] - q[3])
        alpha_dot, beta_dot = 0.5 * (qdot[2] + qdot[3]), 0.5 * (qdot[2] - qdot[3])
        lam, mu = (x + y) / sqrt2, (y - x) / sqrt2
        phi = two_polar_phi(alpha, beta, lam, mu)
        stretch_rate = rotation2(alpha) @ np.diag([(xdot + ydot) / sqrt2, (ydot - xdot) / sqrt2]) @ rotation2(-beta)
        phi_dot = alpha_dot * _J2 @ phi - beta_dot * phi @ _J2 + stretch_rate
        return BodyKinematics(q[:2], qdot[:2], phi, phi_dot)

    radial_domain = _radial_domain(base, margin)

    def domain(q):
        reason = radial_domain(q)
        if reason:
            return reason
        if polar:
            if not q[4] > margin:
                return "rho must be positive"
            if not margin < q[5] < 0.25 * math.pi - margin:
                return "eps must lie in (0, pi/4)"
            return None
        if not q[4] > margin:
            return "x must be positive"
        if not q[5] - q[4] > margin:
            return "y must exceed x (positive determinant)"
        return None

    labels = ("rho", "eps") if polar else ("x", "y")
    box = ((0.5, 1.5), (0.1, 0.7)) if polar else ((0.2, 0.8), (1.0, 1.8))
    return ConfigMetric(
        scenario=name, coordinates=(base.label, "phi", "gamma", "delta") + labels,
        metric_fn=metric, metric_derivative_fn=metric_derivative,
        inertia=inertia, chart=base.chart, frame=builtin_frame(base.chart),
        connection=levi_civita_connection(base.chart),
        cyclic=(1, 2, 3),
        roles={"radial": 0, "angle": 1, labels[0]: 4, labels[1]: 5},
        domain_fn=domain, body_fn=body,
        sampling_box=(base.radial_box, (-math.pi, math.pi), (-math.pi, math.pi), (-math.pi, math.pi)) + box,
    )


def _s3_gyro(R: float, inertia: InertiaSpec, margin: float) -> ConfigMetric:
    k = inertia.I / inertia.m
    chart = sphere3(R, margin)
    frame = builtin_frame(chart, "left")

    def blocks(q):
        return sphere3_coframe(R, q[:3], "left"), left_jacobian(q[3:])

    def metric(q):
        a, b = blocks(q)
        G = np.zeros((6, 6))
        G[:3, :3] = (1.0 + k / (R * R)) * a.T @ a
        G[:3, 3:] = -(k / R) * a.T @ b
        G[3:, :3] = G[:3, 3:].T
        G[3:, 3:] = k * b.T @ b
        return G

    def body(q, qdot):
        phi = exp_so3(q[3:])
        return BodyKinematics(q[:3], qdot[:3], phi, hat(left_jacobian(q[3:]) @ qdot[3:]) @ phi)

    def domain(q):
        if not np.linalg.norm(q[:3]) < math.pi * R - margin:
            return "|r| must stay below pi*R"
        if not np.linalg.norm(q[3:]) < 2.0 * math.pi - margin:
            return "|k| must stay below 2 pi"
        return None

    half = 0.4 * math.pi * R / math.sqrt(3.0)
    return ConfigMetric(
        scenario="s3_gyro", coordinates=("r1", "r2", "r3", "k1", "k2", "k3"), metric_fn=metric,
        inertia=inertia, chart=chart, frame=frame, connection=levi_civita_connection(chart),
        cyclic=(), roles={}, domain_fn=domain, body_fn=body,
        sampling_box=((-half, half),) * 3 + ((-1.0, 1.0),) * 3,
    )


def generic_metric(frame: FrameField, connection: ConnectionField, inertia: InertiaSpec) -> ConfigMetric:
    """
    Affine-body metric on (x, phi) assembled from the co-moving kinetic energy.

    With Z = dphi/dt + Gamma(V) phi, T_int = (1/2) Tr(Z J Z^T) in an
    orthonormal frame, so G = m diag(g, 0) + M^T (1 (x) J) M for the linear
    map M: (dx/dt, dphi/dt) -> Z.
    """
    chart = frame.chart
    n = chart.dim
    J = inertia.J

    def metric(q):
        x = q[:n]
        phi = q[n:].reshape(n, n)
        gamma = aholonomic_connection(frame, connection, x)
        E_inv = frame.coframe(x)
        M = np.zeros((n * n, n + n * n))
        # d Z[A, D] / d xdot^k = Gamma^A_BC E^C_k phi^B_D
        M[:, :n] = np.einsum("ABC,Ck,BD->ADk", gamma, E_inv, phi).reshape(n * n, n)
        M[:, n:] = np.eye(n * n)
        G = M.T @ np.kron(np.eye(n), J) @ M
        G[:n, :n] += inertia.m * chart.metric_fn(x)
        return G / inertia.m

    def body(q, qdot):
        return BodyKinematics(q[:n], qdot[:n], q[n:].reshape(n, n), qdot[n:].reshape(n, n))

    def domain(q):
        if chart.domain_fn is not None:
            reason = chart.domain_fn(q[:n], chart.margin)
            if reason:
                return reason
        if not np.linalg.det(q[n:].reshape(n, n)) > 0.0:
            return "det phi must be positive"
        return None

    labels = chart.coordinates + tuple(f"phi{A + 1}{B + 1}" for A in range(n) for B in range(n))
    box = chart.sampling_box + tuple((1.0 - 0.3, 1.0 + 0.3) if A == B else (-0.3, 0.3)
                                     for A in range(n) for B in range(n))
    return ConfigMetric(
        scenario="generic", coordinates=labels, metric_fn=metric, inertia=inertia, chart=chart,
        frame=frame, connection=connection, cyclic=(), roles={}, domain_fn=domain, body_fn=body,
        sampling_box=box,
    )


def config_metric(
    scenario: str,
    inertia: InertiaSpec,
    R: float = 1.0,
    L: float = 2.0,
    margin: float = 1e-6,
    frame: Optional[FrameField] = None,
    connection: Optional[ConnectionField] = None,
) -> ConfigMetric:
    """
    Configuration metric of a named scenario.

    Args:
        scenario (str): One of SCENARIOS
        inertia (InertiaSpec): Mass and internal inertia
        R (float): Radius (sphere, pseudosphere, S^3) or tube radius (torus)
        L (float): Torus centre-line radius
        margin (float): Singular-locus margin
        frame (Optional[FrameField]): Reference frame for the generic scenario
        connection (Optional[ConnectionField]): Connection for the generic scenario

    Returns:
        ConfigMetric: The scenario metric

    Raises:
        BadParams: Unknown scenario or invalid parameters
    """
    if scenario not in SCENARIOS:
        raise BadParams(f"unknown scenario {scenario!r}; allowed: {', '.join(SCENARIOS)}")
    logger.debug("building configuration metric %s (R=%s, L=%s)", scenario, R, L)
    if scenario == "generic":
        if frame is None:
            raise BadParams("generic scenario needs a frame field")
        return generic_metric(frame, connection or levi_civita_connection(frame.chart), inertia)
    if scenario == "s3_gyro":
        return _s3_gyro(R, inertia, margin)
    kind, _, variant = scenario.partition("_")
    base = base_profile(kind, R, L, margin)
    if variant == "point":
        return _point(base, inertia, scenario, margin)
    if variant == "gyro":
        return _gyro(base, inertia, scenario, margin)
    if variant == "gyro_lorentz":
        return _gyro(base, inertia, scenario, margin, lorentz=True)
    if variant in ("affine", "affine_xy"):
        return _affine(base, inertia, scenario, margin)
    return _affine(base, inertia, scenario, margin, polar=True)


def symmetric_top_energy(I1: float, I3: float, angles, rates) -> float:
    """
    Kinetic energy of a symmetric top in Euler angles (phi, theta, psi).

    T = (I1/2)(theta'^2 + sin^2(theta) phi'^2) + (I3/2)(psi' + cos(theta) phi')^2
    """
    _, theta, _ = angles
    phi_dot, theta_dot, psi_dot = rates
    return 0.5 * I1 * (theta_dot ** 2 + math.sin(theta) ** 2 * phi_dot ** 2) \
        + 0.5 * I3 * (psi_dot + math.cos(theta) * phi_dot) ** 2
