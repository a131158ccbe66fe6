"""
Balance form of the body equations on a chart with an arbitrary metric connection.

State: base point x, translational velocity V, internal legs e[i, A] and the
co-moving internal velocity W_hat = e^-1 De/Dt. Kinematical momenta are
K^a = m V^a and K^ab = e J W^T with W = e W_hat; the affine spin is
S = K^ab - K^ba.

The translational law picks up two forces that do no work:
    curvature  (1/2) S^k_l R^l_k^a_j V^j
    torsion    2 m V^b V^c S_bc^a
The internal law is solved in co-moving form for each constraint mode, and
each RK4 step is followed by a retraction onto the constraint set.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.linalg import solve_sylvester

from ..errors import BadParams, DimensionMismatch, IncompatibleMode, SingularPoint, StepIntoSingularity
from ..geometry.connection import ConnectionField
from ..geometry.curvature import curvature_at
from ..numdiff import gradient
from .inertia import InertiaSpec
from .integrators import rk4_step

logger = logging.getLogger(__name__)

MODES = ("gyroscopic", "incompressible", "dilatational", "rotationless")

# combinations that reduce to a single mode
_ABSORBED = {
    frozenset({"gyroscopic", "incompressible"}): "gyroscopic",
    frozenset({"dilatational", "rotationless"}): "dilatational",
}

BodyPotential = Callable[[np.ndarray, np.ndarray], float]


def resolve_modes(modes: Iterable[str]) -> Optional[str]:
    """
    Reduce a set of constraint modes to the single effective one.

    Args:
        modes (Iterable[str]): Requested modes; empty means unconstrained affine

    Returns:
        Optional[str]: Effective mode, None for the free affine body

    Raises:
        BadParams: Unknown mode name
        IncompatibleMode: Combination with no common motions
    """
    requested: FrozenSet[str] = frozenset(modes)
    unknown = requested - set(MODES)
    if unknown:
        raise BadParams(f"unknown constraint mode(s): {sorted(unknown)}")
    if not requested:
        return None
    if len(requested) == 1:
        return next(iter(requested))
    if requested in _ABSORBED:
        return _ABSORBED[requested]
    raise IncompatibleMode(f"constraint modes {sorted(requested)} cannot be combined")


@dataclass
class BodyState:
    """
    Point of the balance-form phase space.

    Attributes:
        x (np.ndarray): Base point coordinates
        V (np.ndarray): Translational velocity dx/dt
        e (np.ndarray): Internal legs e[i, A]
        W_hat (np.ndarray): Co-moving internal velocity e^-1 De/Dt
        t (float): Time
    """
    x: np.ndarray
    V: np.ndarray
    e: np.ndarray
    W_hat: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.V = np.asarray(self.V, dtype=float)
        self.e = np.asarray(self.e, dtype=float)
        self.W_hat = np.asarray(self.W_hat, dtype=float)
        n = self.x.size
        if self.V.shape != (n,) or self.e.shape != (n, n) or self.W_hat.shape != (n, n):
            raise DimensionMismatch(
                f"body state shapes x{self.x.shape} V{self.V.shape} e{self.e.shape} W{self.W_hat.shape}"
            )

    @property
    def dim(self) -> int:
        return self.x.size

    @property
    def W(self) -> np.ndarray:
        """De/Dt = e W_hat."""
        return self.e @ self.W_hat

    def pack(self) -> np.ndarray:
        return np.concatenate([self.x, self.V, self.e.ravel(), self.W_hat.ravel()])

    @classmethod
    def unpack(cls, z: np.ndarray, n: int, t: float = 0.0) -> "BodyState":
        z = np.asarray(z, dtype=float)
        nn = n * n
        return cls(
            x=z[:n],
            V=z[n:2 * n],
            e=z[2 * n:2 * n + nn].reshape(n, n),
            W_hat=z[2 * n + nn:].reshape(n, n),
            t=t,
        )


def kinematical_momenta(state: BodyState, inertia: InertiaSpec) -> Tuple[np.ndarray, np.ndarray]:
    """K^a = m V^a and K^ab = e J W^T."""
    return inertia.m * state.V, state.e @ inertia.J @ state.W.T


def affine_spin(state: BodyState, inertia: InertiaSpec) -> np.ndarray:
    """S^ab = K^ab - K^ba."""
    _, K = kinematical_momenta(state, inertia)
    return K - K.T


def spin_magnitude(state: BodyState, inertia: InertiaSpec, g: np.ndarray) -> float:
    """sqrt((1/2) S^ij S^kl g_ik g_jl)."""
    S = affine_spin(state, inertia)
    return math.sqrt(max(0.0, 0.5 * float(np.einsum("ij,kl,ik,jl->", S, S, g, g))))


def body_energy(state: BodyState, connection: ConnectionField, inertia: InertiaSpec,
                potential: Optional[BodyPotential] = None) -> float:
    """(m/2) g(V, V) + (1/2) Tr(W_hat^T G W_hat J) + V(x, e)."""
    g = connection.metric(state.x)
    G = state.e.T @ g @ state.e
    T = 0.5 * inertia.m * float(state.V @ g @ state.V)
    T += 0.5 * float(np.trace(state.W_hat.T @ G @ state.W_hat @ inertia.J))
    if potential is not None:
        T += float(potential(state.x, state.e))
    return T


@dataclass
class GeometricForce:
    """
    Work-free forces of the translational balance law (contravariant).

    Attributes:
        curvature (np.ndarray): Spin-curvature coupling
        torsion (np.ndarray): Velocity-torsion coupling
    """
    curvature: np.ndarray
    torsion: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.curvature + self.torsion


def geometric_force(state: BodyState, connection: ConnectionField, inertia: InertiaSpec) -> GeometricForce:
    """
    Curvature and torsion forces acting on a spinning body.

    Args:
        state (BodyState): Current body state
        connection (ConnectionField): Metric connection of the chart
        inertia (InertiaSpec): Mass and internal inertia

    Returns:
        GeometricForce: Both contributions as vectors F^a
    """
    g = connection.metric(state.x)
    g_inv = np.linalg.inv(g)
    S_up = affine_spin(state, inertia)
    S_mixed = S_up @ g  # S^k_l
    Rm = curvature_at(connection, state.x)  # [l, k, i, j]
    curv = 0.5 * np.einsum("kl,lkij,ai,j->a", S_mixed, Rm, g_inv, state.V)

    S = connection.torsion(state.x)
    # T[j, k, i] = S_jk^i
    T = np.einsum("jl,lkm,mi->jki", g, S, g_inv)
    tors = 2.0 * inertia.m * np.einsum("b,c,bca->a", state.V, state.V, T)
    return GeometricForce(curvature=curv, torsion=tors)


def force_power(state: BodyState, connection: ConnectionField, inertia: InertiaSpec) -> float:
    """g_ab V^a F^b of the geometric force; vanishes identically."""
    g = connection.metric(state.x)
    return float(state.V @ g @ geometric_force(state, connection, inertia).total)


def potential_forces(state: BodyState, connection: ConnectionField,
                     potential: Optional[BodyPotential]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Horizontal force F_b = -H_b V and internal covector force Q_iA = -dV/de^i_A.

    H_b differentiates along x while e is parallel transported:
    H_b V = d_b V - Gamma^i_jb e^j_A dV/de^i_A.
    """
    n = state.dim
    if potential is None:
        return np.zeros(n), np.zeros((n, n))
    e = state.e
    dV_de = gradient(lambda y: potential(state.x, y.reshape(n, n)), e.ravel()).reshape(n, n)
    dV_dx = gradient(lambda y: potential(y, e), state.x)
    Gam = connection.gamma(state.x)
    F = -dV_dx + np.einsum("ijb,jA,iA->b", Gam, e, dV_de)
    return F, -dV_de


def _skew_basis(n: int) -> List[np.ndarray]:
    basis = []
    for a in range(n):
        for b in range(a + 1, n):
            B = np.zeros((n, n))
            B[a, b], B[b, a] = 1.0, -1.0
            basis.append(B)
    return basis


def _skew_components(M: np.ndarray) -> np.ndarray:
    n = M.shape[0]
    return np.array([M[a, b] - M[b, a] for a in range(n) for b in range(a + 1, n)])


def internal_acceleration(G: np.ndarray, W_hat: np.ndarray, Q_hat: np.ndarray, J: np.ndarray,
                          mode: Optional[str]) -> np.ndarray:
    """
    Co-moving second derivative e^-1 D^2e/Dt^2 under a constraint mode.

    Args:
        G (np.ndarray): Internal metric e^T g e
        W_hat (np.ndarray): Co-moving velocity
        Q_hat (np.ndarray): Co-moving internal force e^-1 g^-1 Q
        J (np.ndarray): Internal inertia
        mode (Optional[str]): Effective constraint mode (see ``resolve_modes``)

    Returns:
        np.ndarray: The co-moving acceleration
    """
    n = G.shape[0]
    J_inv = np.linalg.inv(J)
    W2 = W_hat @ W_hat
    if mode is None:
        return Q_hat @ J_inv
    if mode == "gyroscopic":
        rhs = J @ W2 - W2 @ J + Q_hat - Q_hat.T
        A = solve_sylvester(J, J, rhs)
        A = 0.5 * (A - A.T)
        return W2 + A
    if mode == "incompressible":
        G_inv = np.linalg.inv(G)
        lam = (np.trace(W2) - np.trace(Q_hat @ J_inv)) / np.trace(G_inv @ J_inv)
        return (Q_hat + lam * G_inv) @ J_inv
    if mode == "dilatational":
        work = np.trace(G @ Q_hat)  # tr(Q^T e) in co-moving form
        return work / np.trace(G @ J) * np.eye(n)
    if mode == "rotationless":
        basis = _skew_basis(n)
        if not basis:
            return Q_hat @ J_inv
        columns = np.stack([_skew_components(G @ B @ J_inv) for B in basis], axis=1)
        target = -_skew_components(G @ Q_hat @ J_inv)
        coeffs = np.linalg.lstsq(columns, target, rcond=None)[0]
        A = sum(c * B for c, B in zip(coeffs, basis))
        return (Q_hat + A) @ J_inv
    raise BadParams(f"unknown constraint mode {mode!r}")


@dataclass
class BalanceRates:
    """
    Right-hand side of the balance form.

    Attributes:
        dK (np.ndarray): DK^a/Dt (contravariant, includes geometric forces)
        dK_internal (np.ndarray): DK^ab/Dt
        geometric (GeometricForce): Work-free part of dK
        derivative (np.ndarray): Time derivative of the packed state
    """
    dK: np.ndarray
    dK_internal: np.ndarray
    geometric: GeometricForce
    derivative: np.ndarray


def balance_rhs(state: BodyState, connection: ConnectionField, inertia: InertiaSpec,
                modes: Iterable[str] = (), potential: Optional[BodyPotential] = None) -> BalanceRates:
    """
    Translational and internal balance laws at a body state.

    Args:
        state (BodyState): Current state
        connection (ConnectionField): Metric connection (torsion allowed)
        inertia (InertiaSpec): Mass and internal inertia J
        modes (Iterable[str]): Constraint modes applied to the internal law
        potential (Optional[BodyPotential]): V(x, e); None for free motion

    Returns:
        BalanceRates: Momentum rates and the packed state derivative

    Raises:
        SingularPoint: Base point outside the chart domain
        IncompatibleMode: Mode combination that cannot be honoured
    """
    mode = resolve_modes(modes)
    n = state.dim
    if inertia.J.shape != (n, n):
        raise DimensionMismatch(f"inertia J has shape {inertia.J.shape}, expected ({n}, {n})")
    x = connection.chart.check_point(state.x)
    g = connection.metric(x)
    g_inv = np.linalg.inv(g)
    Gam = connection.gamma(x)
    m = inertia.m

    F, Q = potential_forces(state, connection, potential)
    geo = geometric_force(state, connection, inertia)
    dK = g_inv @ F + geo.total
    accel = -np.einsum("abc,b,c->a", Gam, state.V, state.V) + dK / m

    e = state.e
    G = e.T @ g @ e
    Q_hat = np.linalg.solve(e, g_inv @ Q)
    X_hat = internal_acceleration(G, state.W_hat, Q_hat, inertia.J, mode)

    e_dot = e @ state.W_hat - np.einsum("ijk,jA,k->iA", Gam, e, state.V)
    W_dot = X_hat - state.W_hat @ state.W_hat

    W = e @ state.W_hat
    dK_int = W @ inertia.J @ W.T + e @ inertia.J @ (e @ X_hat).T
    derivative = np.concatenate([state.V, accel, e_dot.ravel(), W_dot.ravel()])
    return BalanceRates(dK=dK, dK_internal=dK_int, geometric=geo, derivative=derivative)


def _inv_sqrt(G: np.ndarray) -> np.ndarray:
    w, U = np.linalg.eigh(0.5 * (G + G.T))
    if np.any(w <= 0.0):
        raise BadParams("internal metric lost positive definiteness")
    return U @ np.diag(w ** -0.5) @ U.T


def constraint_project(state: BodyState, g: np.ndarray, modes: Iterable[str] = (),
                       reference_det: Optional[float] = None) -> BodyState:
    """
    Retract a state onto the algebraic constraint of a mode.

    Args:
        state (BodyState): State after an unconstrained step
        g (np.ndarray): Metric at the base point
        modes (Iterable[str]): Constraint modes
        reference_det (Optional[float]): det G kept by the incompressible mode

    Returns:
        BodyState: Projected state (a new object)
    """
    mode = resolve_modes(modes)
    e = state.e.copy()
    W = state.W_hat.copy()
    n = state.dim
    G = e.T @ g @ e
    if mode == "gyroscopic":
        e = e @ _inv_sqrt(G)
        W = 0.5 * (W - W.T)
    elif mode == "incompressible":
        target = np.linalg.det(G) if reference_det is None else reference_det
        e = e * (target / np.linalg.det(G)) ** (1.0 / (2 * n))
        W = W - np.trace(W) / n * np.eye(n)
    elif mode == "dilatational":
        e = e @ _inv_sqrt(G) * math.sqrt(np.trace(G) / n)
        W = np.trace(W) / n * np.eye(n)
    elif mode == "rotationless":
        G_inv = np.linalg.inv(G)
        GW = G @ W
        W = G_inv @ (0.5 * (GW + GW.T))
    return BodyState(x=state.x.copy(), V=state.V.copy(), e=e, W_hat=W, t=state.t)


def constraint_residual(state: BodyState, g: np.ndarray, mode: Optional[str],
                        reference_det: Optional[float] = None) -> float:
    """Distance of a state from the constraint set of a mode."""
    n = state.dim
    G = state.e.T @ g @ state.e
    if mode == "gyroscopic":
        return float(np.max(np.abs(G - np.eye(n))))
    if mode == "incompressible":
        drift = 0.0 if reference_det is None else abs(np.linalg.det(G) - reference_det)
        return max(abs(float(np.trace(state.W_hat))), drift)
    if mode == "dilatational":
        return float(np.max(np.abs(G - np.trace(G) / n * np.eye(n))))
    if mode == "rotationless":
        GW = G @ state.W_hat
        return float(np.max(np.abs(GW - GW.T)))
    return 0.0


@dataclass
class BalanceTrajectory:
    """
    Sampled balance-form trajectory with its monitors.

    Attributes:
        states (List[BodyState]): Samples every ``output_every`` steps
        mode (Optional[str]): Effective constraint mode
        dt (float): Step size
        steps (int): Steps completed
        partial (bool): True when integration stopped early
        monitors (Dict[str, List[float]]): energy, spin, power and constraint per sample
    """
    states: List[BodyState] = field(default_factory=list)
    mode: Optional[str] = None
    dt: float = 0.0
    steps: int = 0
    partial: bool = False
    monitors: Dict[str, List[float]] = field(default_factory=lambda: {
        "energy": [], "spin": [], "power": [], "constraint": [],
    })

    def drift(self, name: str) -> float:
        series = np.asarray(self.monitors[name])
        if series.size == 0:
            return 0.0
        return float(np.max(np.abs(series - series[0])))

    def max_abs(self, name: str) -> float:
        series = np.asarray(self.monitors[name])
        return float(np.max(np.abs(series))) if series.size else 0.0

    def to_frame(self) -> pd.DataFrame:
        if not self.states:
            return pd.DataFrame()
        n = self.states[0].dim
        rows = []
        for k, s in enumerate(self.states):
            row = {"t": s.t}
            row.update({f"x{i}": s.x[i] for i in range(n)})
            row.update({f"V{i}": s.V[i] for i in range(n)})
            row.update({key: series[k] for key, series in self.monitors.items()})
            rows.append(row)
        return pd.DataFrame(rows)


def integrate_balance(
    state0: BodyState,
    connection: ConnectionField,
    inertia: InertiaSpec,
    dt: float,
    steps: int,
    modes: Iterable[str] = (),
    potential: Optional[BodyPotential] = None,
    output_every: int = 1,
) -> BalanceTrajectory:
    """
    RK4 integration of the balance form with a retraction after every step.

    Args:
        state0 (BodyState): Initial state (projected before the first step)
        connection (ConnectionField): Metric connection
        inertia (InertiaSpec): Mass and internal inertia
        dt (float): Step size
        steps (int): Number of steps
        modes (Iterable[str]): Constraint modes
        potential (Optional[BodyPotential]): V(x, e)
        output_every (int): Sampling stride

    Returns:
        BalanceTrajectory: Samples and monitors

    Raises:
        StepIntoSingularity: Base point left the chart domain; the partial
            trajectory is attached to the exception
    """
    if dt <= 0 or steps < 0 or output_every < 1:
        raise BadParams("dt must be positive, steps non-negative and output_every >= 1")
    mode = resolve_modes(modes)
    n = state0.dim
    g0 = connection.metric(state0.x)
    ref_det = float(np.linalg.det(state0.e.T @ g0 @ state0.e))
    state = constraint_project(state0, g0, modes, ref_det)
    traj = BalanceTrajectory(mode=mode, dt=dt)

    def record(s: BodyState) -> None:
        g = connection.metric(s.x)
        traj.states.append(s)
        traj.monitors["energy"].append(body_energy(s, connection, inertia, potential))
        traj.monitors["spin"].append(spin_magnitude(s, inertia, g))
        traj.monitors["power"].append(force_power(s, connection, inertia))
        traj.monitors["constraint"].append(constraint_residual(s, g, mode, ref_det))

    def f(z: np.ndarray) -> np.ndarray:
        return balance_rhs(BodyState.unpack(z, n), connection, inertia, modes, potential).derivative

    record(state)
    z = state.pack()
    for k in range(1, steps + 1):
        try:
            s = BodyState.unpack(rk4_step(f, z, dt), n, t=state0.t + k * dt)
            s = constraint_project(s, connection.metric(s.x), modes, ref_det)
        except SingularPoint as exc:
            traj.partial = True
            logger.warning("balance integration stopped at step %d: %s", k, exc)
            raise StepIntoSingularity(str(exc), trajectory=traj) from exc
        z = s.pack()
        traj.steps = k
        if k % output_every == 0 or k == steps:
            record(s)
    logger.debug("balance integration finished: %d steps, mode=%s", traj.steps, mode)
    return traj
