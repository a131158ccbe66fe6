"""
Exponential maps of SU(2) and SO(3) in canonical coordinates of the first kind.

SU(2) elements are held as unit quaternions (a, b) standing for
u = a I - i b.sigma, so that exp_su2(k) = cos(k/2) I - i sin(k/2) n.sigma.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import BadParams

_SERIES_SWITCH = 1e-4

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def hat(v) -> np.ndarray:
    """Skew matrix [v]x with [v]x w = v x w."""
    v = np.asarray(v, dtype=float)
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def vee(M) -> np.ndarray:
    """Inverse of ``hat`` on the skew part of M."""
    M = np.asarray(M, dtype=float)
    return 0.5 * np.array([M[2, 1] - M[1, 2], M[0, 2] - M[2, 0], M[1, 0] - M[0, 1]])


@dataclass(frozen=True)
class RotationVector:
    """
    Rotation vector k-bar with its magnitude and versor.

    Attributes:
        k (np.ndarray): Rotation vector
        group (str): "su2" (0 <= k < 2 pi) or "so3" (0 <= k <= pi)
    """
    k: np.ndarray
    group: str = "su2"

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        object.__setattr__(self, "k", k)
        limit = 2.0 * math.pi if self.group == "su2" else math.pi
        if k.shape != (3,) or not np.all(np.isfinite(k)):
            raise BadParams("rotation vector must be a finite 3-vector")
        if self.magnitude > limit:
            raise BadParams(f"|k| = {self.magnitude} exceeds the {self.group} chart limit {limit}")

    @property
    def magnitude(self) -> float:
        return float(np.linalg.norm(self.k))

    @property
    def versor(self) -> np.ndarray:
        k = self.magnitude
        return self.k / k if k > 0.0 else np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class UnitQuaternion:
    """
    SU(2) element u = a I - i b.sigma.

    Attributes:
        a (float): Scalar part
        b (np.ndarray): Vector part
    """
    a: float
    b: np.ndarray

    def matrix(self) -> np.ndarray:
        """2 x 2 complex unitary form."""
        b = np.asarray(self.b, dtype=float)
        return self.a * np.eye(2, dtype=complex) - 1j * sum(bi * s for bi, s in zip(b, PAULI))

    def __neg__(self) -> "UnitQuaternion":
        return UnitQuaternion(-self.a, -np.asarray(self.b))

    @classmethod
    def from_matrix(cls, u) -> "UnitQuaternion":
        u = np.asarray(u, dtype=complex)
        return cls(float(u[0, 0].real), np.array([-u[0, 1].imag, -u[0, 1].real, -u[0, 0].imag]))


def _half_sinc(k: float) -> float:
    """sin(k/2) / k."""
    if k < _SERIES_SWITCH:
        return 0.5 - k * k / 48.0
    return math.sin(0.5 * k) / k


def exp_su2(k) -> UnitQuaternion:
    """exp(-i k.sigma / 2) as a unit quaternion."""
    k = np.asarray(k, dtype=float)
    mag = float(np.linalg.norm(k))
    return UnitQuaternion(math.cos(0.5 * mag), _half_sinc(mag) * k)


def exp_so3(k) -> np.ndarray:
    """
    Rotation matrix of a rotation vector.

    R = cos k I + (1 - cos k) n n^T + sin k [n]x
    """
    k = np.asarray(k, dtype=float)
    mag = float(np.linalg.norm(k))
    K = hat(k)
    if mag < _SERIES_SWITCH:
        return np.eye(3) + K + 0.5 * K @ K
    return np.eye(3) + (math.sin(mag) / mag) * K + ((1.0 - math.cos(mag)) / mag ** 2) * K @ K


def project_su2_to_so3(u) -> np.ndarray:
    """
    Two-to-one homomorphism SU(2) -> SO(3).

    Args:
        u: UnitQuaternion or 2 x 2 complex matrix

    Returns:
        np.ndarray: R = (a^2 - |b|^2) I + 2 b b^T + 2 a [b]x
    """
    q = u if isinstance(u, UnitQuaternion) else UnitQuaternion.from_matrix(u)
    b = np.asarray(q.b, dtype=float)
    return (q.a * q.a - b @ b) * np.eye(3) + 2.0 * np.outer(b, b) + 2.0 * q.a * hat(b)


def left_jacobian(k) -> np.ndarray:
    """
    J_l(k) with dR/dt R^T = [J_l(k) dk/dt]x for R = exp_so3(k).
    """
    k = np.asarray(k, dtype=float)
    mag = float(np.linalg.norm(k))
    K = hat(k)
    if mag < _SERIES_SWITCH:
        c1 = 0.5 - mag * mag / 24.0
        c2 = 1.0 / 6.0 - mag * mag / 120.0
    else:
        c1 = (1.0 - math.cos(mag)) / mag ** 2
        c2 = (mag - math.sin(mag)) / mag ** 3
    return np.eye(3) + c1 * K + c2 * K @ K


def so3_generators() -> np.ndarray:
    """Generators (A_K)^L_M = -eps_KLM, stacked as [K, L, M]."""
    eps = np.zeros((3, 3, 3))
    eps[0, 1, 2] = eps[1, 2, 0] = eps[2, 0, 1] = 1.0
    eps[0, 2, 1] = eps[2, 1, 0] = eps[1, 0, 2] = -1.0
    return -eps


def killing_form_so3() -> np.ndarray:
    """
    Killing form B_KL = Tr(ad A_K ad A_L) of so(3) in the generator basis.

    Evaluates to -2 delta_KL.
    """
    A = so3_generators()
    basis = A.reshape(3, 9).T
    # structure constants from [A_K, A_L] = c^M_KL A_M
    c = np.zeros((3, 3, 3))
    for K in range(3):
        for L in range(3):
            commutator = A[K] @ A[L] - A[L] @ A[K]
            c[:, K, L] = np.linalg.lstsq(basis, commutator.reshape(9), rcond=None)[0]
    return np.einsum("MKN,NLM->KL", c, c)
