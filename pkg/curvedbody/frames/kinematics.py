"""
Co-moving kinematics of a material point with internal degrees of freedom.

The internal frame is ``e_A = E_B phi^B_A`` for a reference frame field E,
so e[i, A] = (E @ phi)[i, A]. The co-moving affine velocity splits as

    Omega_hat = Omega_hat_rl + Omega_hat_dr
    Omega_hat_rl = phi^-1 dphi/dt
    Omega_hat_dr = phi^-1 (Gamma^A_BC V^C) phi

with Gamma^A_BC the aholonomic connection coefficients and V^C the
translational velocity in the reference frame.
"""

import logging
from dataclasses import dataclass
import numpy as np

from ..errors import BadParams, SingularPhi
from ..geometry.connection import ConnectionField
from .fields import FrameField, aholonomic_connection

logger = logging.getLogger(__name__)

MODES = ("affine", "gyroscopic")


@dataclass(frozen=True)
class InternalConfiguration:
    """
    Base point plus internal configuration relative to a reference frame.

    Attributes:
        base_point (np.ndarray): Coordinates of the material point
        phi (np.ndarray): phi^A_B, n x n
        mode (str): "affine" or "gyroscopic"
    """
    base_point: np.ndarray
    phi: np.ndarray
    mode: str = "affine"

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "base_point", np.asarray(self.base_point, dtype=float))
        if self.mode not in MODES:
            raise BadParams(f"mode must be one of {MODES}, got {self.mode!r}")
        if phi.ndim != 2 or phi.shape[0] != phi.shape[1]:
            raise BadParams(f"phi must be square, got shape {phi.shape}")
        det = np.linalg.det(phi)
        if abs(det) < 1e-14:
            raise SingularPhi("det phi vanishes")
        if self.mode == "gyroscopic":
            residual = np.max(np.abs(phi.T @ phi - np.eye(phi.shape[0])))
            if residual > 1e-10:
                raise BadParams(f"gyroscopic phi must be orthogonal (|phi^T phi - 1| = {residual:.3g})")
        elif det < 0.0:
            raise BadParams("affine phi must have positive determinant")

    @property
    def dim(self) -> int:
        return self.phi.shape[0]

    def frame(self, reference: FrameField) -> np.ndarray:
        """Internal legs e[i, A] = E^i_B phi^B_A."""
        return reference.legs(self.base_point) @ self.phi

    def coframe(self, reference: FrameField) -> np.ndarray:
        """Internal coframe e^A_i."""
        return np.linalg.solve(self.phi, reference.coframe(self.base_point))

    def duality_residual(self, reference: FrameField) -> float:
        e = self.frame(reference)
        return float(np.max(np.abs(self.coframe(reference) @ e - np.eye(self.dim))))


def rotation2(angle: float) -> np.ndarray:
    """Planar rotation matrix."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass
class CoMovingVelocity:
    """
    Co-moving velocities of a body.

    Attributes:
        omega_hat (np.ndarray): Omega_hat^A_B
        drift (np.ndarray): Part induced by the reference frame along the path
        relative (np.ndarray): phi^-1 dphi/dt
        v_hat (np.ndarray): V_hat^A = e^A_i V^i
        spatial (np.ndarray): Omega^i_j = e^i_A Omega_hat^A_B e^B_j
    """
    omega_hat: np.ndarray
    drift: np.ndarray
    relative: np.ndarray
    v_hat: np.ndarray
    spatial: np.ndarray

    @property
    def scalar_rate(self) -> float:
        """Angular velocity omega = Omega_hat^2_1 of a planar gyroscope."""
        return float(self.omega_hat[1, 0])

    def skew_residual(self) -> float:
        return float(np.max(np.abs(self.omega_hat + self.omega_hat.T)))


def comoving_velocity(
    config: InternalConfiguration,
    base_velocity,
    phi_dot,
    frame: FrameField,
    connection: ConnectionField,
) -> CoMovingVelocity:
    """
    Co-moving affine and translational velocity.

    Args:
        config (InternalConfiguration): Current configuration
        base_velocity: dx^i/dt at the base point
        phi_dot: d phi/dt
        frame (FrameField): Reference frame E
        connection (ConnectionField): Connection used for D/Dt

    Returns:
        CoMovingVelocity: Omega_hat with its drift/relative split
    """
    v = np.asarray(base_velocity, dtype=float)
    phi = config.phi
    phi_inv = np.linalg.inv(phi)
    gamma_ah = aholonomic_connection(frame, connection, config.base_point)
    v_frame = frame.coframe(config.base_point) @ v
    reference_rate = np.einsum("ABC,C->AB", gamma_ah, v_frame)
    relative = phi_inv @ np.asarray(phi_dot, dtype=float)
    drift = phi_inv @ reference_rate @ phi
    omega_hat = relative + drift
    e = frame.legs(config.base_point) @ phi
    e_inv = np.linalg.inv(e)
    return CoMovingVelocity(
        omega_hat=omega_hat,
        drift=drift,
        relative=relative,
        v_hat=e_inv @ v,
        spatial=e @ omega_hat @ e_inv,
    )


def deformation_free_residual(
    config: InternalConfiguration,
    velocity: CoMovingVelocity,
    frame: FrameField,
) -> float:
    """
    Residual of the connection-free constraint: Omega skew with respect to the Cauchy tensor.

    Only reported; no integrator branch enforces it.
    """
    e = frame.legs(config.base_point) @ config.phi
    e_inv = np.linalg.inv(e)
    cauchy = e_inv.T @ e_inv
    lowered = cauchy @ velocity.spatial
    return float(np.max(np.abs(lowered + lowered.T)))
