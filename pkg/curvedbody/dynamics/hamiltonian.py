"""
Kinetic energy, Legendre transform and canonical equations of motion.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np

from ..errors import UnsupportedForce
from ..frames.kinematics import InternalConfiguration, comoving_velocity
from ..frames.fields import FrameField
from ..geometry.connection import ConnectionField
from ..numdiff import gradient
from .inertia import InertiaSpec
from .potentials import PotentialSpec
from .scenarios import ConfigMetric

logger = logging.getLogger(__name__)

PotentialLike = Union[None, PotentialSpec, Callable[[np.ndarray], float]]


@dataclass
class PhaseState:
    """
    Canonical state of a scenario.

    Attributes:
        q (np.ndarray): Generalized coordinates in scenario order
        p (np.ndarray): Conjugate momenta
        t (float): Time
    """
    q: np.ndarray
    p: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.p = np.asarray(self.p, dtype=float)

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])


def kinetic_energy(metric: ConfigMetric, q, qdot) -> float:
    """T = (m/2) G-breve_ij dq^i dq^j."""
    qdot = np.asarray(qdot, dtype=float)
    return 0.5 * metric.m * float(qdot @ metric.G(q) @ qdot)


def comoving_kinetic(
    config: InternalConfiguration,
    base_velocity,
    phi_dot,
    frame: FrameField,
    connection: ConnectionField,
    inertia: InertiaSpec,
) -> float:
    """
    Kinetic energy from co-moving quantities.

    T = (m/2) g(V, V) + (1/2) Tr(Omega_hat^T G[e] Omega_hat J)

    Args:
        config (InternalConfiguration): Base point and phi
        base_velocity: dx/dt
        phi_dot: d phi/dt
        frame (FrameField): Reference frame E
        connection (ConnectionField): Connection defining D/Dt
        inertia (InertiaSpec): m and J

    Returns:
        float: Kinetic energy
    """
    v = np.asarray(base_velocity, dtype=float)
    g = connection.metric(config.base_point)
    omega = comoving_velocity(config, v, phi_dot, frame, connection).omega_hat
    e = frame.legs(config.base_point) @ config.phi
    green = e.T @ g @ e
    return 0.5 * inertia.m * float(v @ g @ v) + 0.5 * float(np.trace(omega.T @ green @ omega @ inertia.J))


def comoving_kinetic_of(metric: ConfigMetric, q, qdot) -> float:
    """Co-moving kinetic energy of a scenario state, for comparison with ``kinetic_energy``."""
    body = metric.body(q, qdot)
    config = InternalConfiguration(body.base_point, body.phi, metric.inertia.mode)
    return comoving_kinetic(config, body.base_velocity, body.phi_dot, metric.frame, metric.connection, metric.inertia)


def polar_kinetic(A, A_dot, omega, J) -> float:
    """
    Internal kinetic energy in polar variables phi = U A.

    With omega = U^-1 DU/Dt skew, D phi/Dt = U (omega A + dA/dt) and
    T_int = (1/2) Tr((omega A + A') J (omega A + A')^T).
    """
    Z = np.asarray(omega) @ np.asarray(A) + np.asarray(A_dot)
    return 0.5 * float(np.trace(Z @ np.asarray(J) @ Z.T))


def two_polar_kinetic(D, D_dot, chi, rho, J) -> float:
    """
    Internal kinetic energy in two-polar variables phi = L D Rm^-1.

    chi = L^-1 DL/Dt and rho = Rm^-1 dRm/dt are skew; then
    D phi/Dt = L (chi D - D rho + D') Rm^-1.
    """
    D = np.asarray(D)
    Z = np.asarray(chi) @ D - D @ np.asarray(rho) + np.asarray(D_dot)
    return 0.5 * float(np.trace(Z @ np.asarray(J) @ Z.T))


def legendre(metric: ConfigMetric, q, qdot) -> np.ndarray:
    """p_i = m G-breve_ij dq^j/dt."""
    return metric.m * metric.G(q) @ np.asarray(qdot, dtype=float)


def legendre_inverse(metric: ConfigMetric, q, p) -> np.ndarray:
    """dq/dt = G-breve^-1 p / m; raises SingularMetric when G is not invertible."""
    return metric.G_inv(q) @ np.asarray(p, dtype=float) / metric.m


def potential_energy(metric: ConfigMetric, potential: PotentialLike, q) -> float:
    if potential is None:
        return 0.0
    if isinstance(potential, PotentialSpec):
        if potential.kind == "zero":
            return 0.0
        if not metric.roles:
            raise UnsupportedForce(f"{metric.scenario} supports only the zero potential")
        return potential.evaluate(q, metric.roles)
    return float(potential(np.asarray(q, dtype=float)))


def hamiltonian(metric: ConfigMetric, q, p, potential: PotentialLike = None) -> float:
    """H = (1/2m) G-breve^ij p_i p_j + V(q)."""
    p = np.asarray(p, dtype=float)
    return 0.5 * float(p @ metric.G_inv(q) @ p) / metric.m + potential_energy(metric, potential, q)


def kinetic_gradient(metric: ConfigMetric, q, p) -> np.ndarray:
    """
    dT/dq at fixed p, -(1/2m) u^T (dG-breve/dq^k) u with u = G-breve^-1 p.

    Exactly zero along a coordinate the metric does not depend on.
    """
    u = metric.G_inv(q) @ np.asarray(p, dtype=float)
    return -0.5 * np.einsum("i,ijk,j->k", u, metric.dG(q), u) / metric.m


def potential_gradient(metric: ConfigMetric, potential: PotentialLike, q) -> np.ndarray:
    """dV/dq by central differences; zero for the zero potential."""
    q = np.asarray(q, dtype=float)
    if potential is None or (isinstance(potential, PotentialSpec) and potential.kind == "zero"):
        return np.zeros_like(q)
    return gradient(lambda y: potential_energy(metric, potential, y), q)


def eom_rhs(state: PhaseState, metric: ConfigMetric, potential: PotentialLike = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Canonical equations dq/dt = dH/dp, dp/dt = -dH/dq.

    The kinetic q-gradient contracts the metric derivative (closed form for
    the two-dimensional bases) with G-breve^-1 p; the potential part is a
    central difference of V alone.
    """
    q, p = state.q, state.p
    qdot = legendre_inverse(metric, q, p)
    pdot = -(kinetic_gradient(metric, q, p) + potential_gradient(metric, potential, q))
    return qdot, pdot


def vector_field(metric: ConfigMetric, potential: PotentialLike = None) -> Callable[[np.ndarray], np.ndarray]:
    """Hamiltonian vector field on the stacked phase vector z = (q, p)."""
    n = metric.dim

    def f(z):
        qdot, pdot = eom_rhs(PhaseState(z[:n], z[n:]), metric, potential)
        return np.concatenate([qdot, pdot])

    return f


def energy_function(metric: ConfigMetric, potential: PotentialLike = None) -> Callable[[np.ndarray], float]:
    n = metric.dim
    return lambda z: hamiltonian(metric, z[:n], z[n:], potential)


def effective_cyclic(metric: ConfigMetric, potential: PotentialLike = None) -> Tuple[int, ...]:
    """Cyclic coordinates that stay cyclic under the given potential."""
    if isinstance(potential, PotentialSpec) and potential.kind == "separable_sphere":
        return tuple(i for i in metric.cyclic if i != metric.roles.get("angle"))
    if potential is not None and not isinstance(potential, PotentialSpec):
        return ()
    return metric.cyclic


def characteristic_time(metric: ConfigMetric, energy: float, R: Optional[float] = None) -> float:
    """2 pi max(R sqrt(m / max(E, 1)), sqrt(I / max(E, 1)))."""
    R = R if R is not None else metric.chart.params.get("R", 1.0)
    scale = max(energy, 1.0)
    return 2.0 * np.pi * max(R * np.sqrt(metric.m / scale), np.sqrt(metric.inertia.I / scale))
