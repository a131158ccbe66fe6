"""
Angular-momentum variables of the S^3 gyroscope and their reduced flow.

The drive momentum S is the left-frame component of the translational
momentum, S_A = E(R)_A^i p_i; the relative momentum S_rl is conjugate to
the relative angular velocity. The geodetic Hamiltonian is

    T = |S|^2 / 2m + S.S_rl / (m R) + (I + m R^2) |S_rl|^2 / (2 I m R^2)

and only the interference term S.S_rl drives the flow.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
import pandas as pd

from ..errors import BadParams
from ..frames.fields import sphere3_legs
from .groups import left_jacobian

logger = logging.getLogger(__name__)

FLOW_COLUMNS = ("t", "S1", "S2", "S3", "Srl1", "Srl2", "Srl3", "|S|", "|Srl|", "dot", "c1", "c2", "c3")


def _check(m: float, I: float, R: float) -> None:
    for name, value in (("m", m), ("I", I), ("R", R)):
        if not value > 0.0:
            raise BadParams(f"{name} must be positive, got {value}")


@dataclass
class MomentumPair:
    """
    Drive and relative angular momenta.

    Attributes:
        S (np.ndarray): Drive momentum S(R)
        S_rl (np.ndarray): Relative momentum
        m (float): Mass
        I (float): Internal inertia
        R (float): Radius of S^3
    """
    S: np.ndarray
    S_rl: np.ndarray
    m: float
    I: float
    R: float

    def __post_init__(self):
        _check(self.m, self.I, self.R)
        self.S = np.asarray(self.S, dtype=float)
        self.S_rl = np.asarray(self.S_rl, dtype=float)

    @property
    def conserved_vector(self) -> np.ndarray:
        """(R/2) S + S_rl."""
        return 0.5 * self.R * self.S + self.S_rl


def s3_legendre(omega, omega_rl, m: float, I: float, R: float) -> MomentumPair:
    """
    Momenta from the drive and relative angular velocities.

    S = (m + I/R^2) Omega - (I/R) Omega_rl,  S_rl = I Omega_rl - (I/R) Omega
    """
    _check(m, I, R)
    omega = np.asarray(omega, dtype=float)
    omega_rl = np.asarray(omega_rl, dtype=float)
    S = (m + I / R ** 2) * omega - (I / R) * omega_rl
    S_rl = I * omega_rl - (I / R) * omega
    return MomentumPair(S, S_rl, m, I, R)


def s3_legendre_inverse(pair: MomentumPair) -> Tuple[np.ndarray, np.ndarray]:
    """(Omega, Omega_rl) from the momenta."""
    omega = (pair.S + pair.S_rl / pair.R) / pair.m
    omega_rl = pair.S_rl / pair.I + omega / pair.R
    return omega, omega_rl


def kinetic_lagrangian(omega, omega_rl, m: float, I: float, R: float) -> float:
    """T = (m/2)|Omega|^2 + (I/2)|Omega/R - Omega_rl|^2."""
    omega = np.asarray(omega, dtype=float)
    rel = omega / R - np.asarray(omega_rl, dtype=float)
    return 0.5 * m * float(omega @ omega) + 0.5 * I * float(rel @ rel)


def kinetic_hamiltonian(pair: MomentumPair, interference: float = 1.0) -> float:
    """Geodetic Hamiltonian of the S^3 gyroscope in momentum variables."""
    m, I, R = pair.m, pair.I, pair.R
    return (
        float(pair.S @ pair.S) / (2.0 * m)
        + interference * float(pair.S @ pair.S_rl) / (m * R)
        + (I + m * R * R) * float(pair.S_rl @ pair.S_rl) / (2.0 * I * m * R * R)
    )


def s3_momentum_pair(q, p, m: float, I: float, R: float, side: str = "left") -> MomentumPair:
    """
    Project a canonical s3_gyro state onto its momentum pair.

    S = E(R)^T p_r for the chosen invariant frame and
    S_rl = J_l^-T p_k (left) or J_r^-T p_k with J_r = J_l^T (right).
    """
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    legs = sphere3_legs(R, q[:3], side)
    Jl = left_jacobian(q[3:])
    Jk = Jl if side == "left" else Jl.T
    return MomentumPair(legs.T @ p[:3], np.linalg.solve(Jk.T, p[3:]), m, I, R)


def _rates(S: np.ndarray, S_rl: np.ndarray, m: float, R: float, interference: float):
    dS = interference * (2.0 / (m * R * R)) * np.cross(S_rl, S)
    dS_rl = interference * (1.0 / (m * R)) * np.cross(S, S_rl)
    return dS, dS_rl


@dataclass
class MomentumFlow:
    """
    Sampled reduced flow with its constants of motion.

    Attributes:
        times (np.ndarray): Sample times
        S (np.ndarray): Drive momentum samples, shape (k, 3)
        S_rl (np.ndarray): Relative momentum samples, shape (k, 3)
        R (float): Radius of S^3
        constants (Dict[str, float]): Maximum relative drift of each constant
    """
    times: np.ndarray
    S: np.ndarray
    S_rl: np.ndarray
    R: float
    constants: Dict[str, float] = field(default_factory=dict)

    def conserved(self) -> np.ndarray:
        return 0.5 * self.R * self.S + self.S_rl

    def to_frame(self) -> pd.DataFrame:
        """Samples as a table with the momentum-flow CSV columns."""
        c = self.conserved()
        data = np.column_stack([
            self.times, self.S, self.S_rl,
            np.linalg.norm(self.S, axis=1), np.linalg.norm(self.S_rl, axis=1),
            np.einsum("ij,ij->i", self.S, self.S_rl), c,
        ])
        return pd.DataFrame(data, columns=list(FLOW_COLUMNS))


def _drift(series: np.ndarray) -> float:
    ref = np.abs(series[0])
    dev = np.max(np.abs(series - series[0]), axis=0)
    scale = np.where(ref > 1e-12, ref, 1.0)
    return float(np.max(dev / scale))


def momentum_flow(
    pair: MomentumPair,
    dt: float,
    steps: int,
    output_every: int = 1,
    interference: float = 1.0,
) -> MomentumFlow:
    """
    Integrate the reduced geodetic flow with classical RK4.

        dS/dt = (2/(m R^2)) S_rl x S,   dS_rl/dt = (1/(m R)) S x S_rl

    Args:
        pair (MomentumPair): Initial momenta
        dt (float): Time step
        steps (int): Number of steps
        output_every (int): Sampling stride
        interference (float): Scale of the S.S_rl coupling; 0 freezes the flow

    Returns:
        MomentumFlow: Samples and drift of |S|, |S_rl|, S.S_rl and (R/2)S + S_rl
    """
    if not dt > 0.0:
        raise BadParams(f"dt must be positive, got {dt}")
    m, R = pair.m, pair.R
    S, S_rl = pair.S.copy(), pair.S_rl.copy()
    times: List[float] = [0.0]
    S_hist, rl_hist = [S.copy()], [S_rl.copy()]
    for step in range(1, steps + 1):
        k1 = _rates(S, S_rl, m, R, interference)
        k2 = _rates(S + 0.5 * dt * k1[0], S_rl + 0.5 * dt * k1[1], m, R, interference)
        k3 = _rates(S + 0.5 * dt * k2[0], S_rl + 0.5 * dt * k2[1], m, R, interference)
        k4 = _rates(S + dt * k3[0], S_rl + dt * k3[1], m, R, interference)
        S = S + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        S_rl = S_rl + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        if step % output_every == 0 or step == steps:
            times.append(step * dt)
            S_hist.append(S.copy())
            rl_hist.append(S_rl.copy())
    flow = MomentumFlow(np.array(times), np.array(S_hist), np.array(rl_hist), R)
    c = flow.conserved()
    flow.constants = {
        "|S|": _drift(np.linalg.norm(flow.S, axis=1)[:, None]),
        "|Srl|": _drift(np.linalg.norm(flow.S_rl, axis=1)[:, None]),
        "dot": _drift(np.einsum("ij,ij->i", flow.S, flow.S_rl)[:, None]),
        "conserved_vector": float(np.max(np.linalg.norm(c - c[0], axis=1)) / max(np.linalg.norm(c[0]), 1e-300)),
    }
    logger.info("momentum flow: %d steps, dt=%s, drifts %s", steps, dt, flow.constants)
    return flow


def plane_normal_angle(flow: MomentumFlow) -> np.ndarray:
    """Angle between the normal of span{S, S_rl} and the conserved vector, per sample."""
    normal = np.cross(flow.S, flow.S_rl)
    c = flow.conserved()
    cosine = np.einsum("ij,ij->i", normal, c) / (np.linalg.norm(normal, axis=1) * np.linalg.norm(c, axis=1))
    return np.arccos(np.clip(cosine, -1.0, 1.0))
