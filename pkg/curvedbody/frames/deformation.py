"""
Deformation tensors and the polar / two-polar decompositions of phi.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from ..errors import SingularPhi
from .kinematics import InternalConfiguration

# relative gap below which two deformation invariants count as equal
_TIE_TOLERANCE = 1e-12


@dataclass
class DeformationTensors:
    """
    Green, Cauchy, Lagrange and Euler tensors of an internal configuration.

    Attributes:
        green (np.ndarray): G[e]_AB = g_ij e^i_A e^j_B
        cauchy (np.ndarray): C[e]_ij = delta_AB e^A_i e^B_j
        lagrange (np.ndarray): (G - delta) / 2
        euler (np.ndarray): (g - C) / 2
        invariants (np.ndarray): Square roots of the eigenvalues of G, descending
        polar_pair (Optional[tuple]): (rho, eps) for n = 2, with x = rho sin eps, y = rho cos eps
        xy_pair (Optional[tuple]): x = (lambda - mu)/sqrt 2, y = (lambda + mu)/sqrt 2 for n = 2
    """
    green: np.ndarray
    cauchy: np.ndarray
    lagrange: np.ndarray
    euler: np.ndarray
    invariants: np.ndarray
    polar_pair: Optional[tuple] = None
    xy_pair: Optional[tuple] = None


def deformation_tensors(config: InternalConfiguration, metric, legs=None) -> DeformationTensors:
    """
    Deformation tensors of e = E phi.

    Args:
        config (InternalConfiguration): Internal configuration
        metric: g_ij at the base point
        legs: Reference legs E[i, A]; identity when omitted

    Returns:
        DeformationTensors: All tensors plus the planar invariants
    """
    g = np.asarray(metric, dtype=float)
    n = config.dim
    E = np.eye(n) if legs is None else np.asarray(legs, dtype=float)
    e = E @ config.phi
    if abs(np.linalg.det(e)) < 1e-14:
        raise SingularPhi("internal frame is degenerate")
    e_inv = np.linalg.inv(e)
    if config.mode == "gyroscopic":
        green = np.eye(n)
    else:
        green = e.T @ g @ e
    cauchy = e_inv.T @ e_inv
    eigenvalues = np.clip(np.linalg.eigvalsh(0.5 * (green + green.T)), 0.0, None)
    invariants = np.sqrt(eigenvalues)[::-1]
    polar_pair = xy_pair = None
    if n == 2:
        lam, mu = invariants
        x = (lam - mu) / math.sqrt(2.0)
        y = (lam + mu) / math.sqrt(2.0)
        xy_pair = (x, y)
        polar_pair = (math.hypot(x, y), math.atan2(x, y))
    return DeformationTensors(
        green=green,
        cauchy=cauchy,
        lagrange=0.5 * (green - np.eye(n)),
        euler=0.5 * (g - cauchy),
        invariants=invariants,
        polar_pair=polar_pair,
        xy_pair=xy_pair,
    )


def invariants_from_polar(rho: float, eps: float) -> tuple:
    """(lambda, mu) from the polar pair (rho, eps)."""
    x, y = rho * math.sin(eps), rho * math.cos(eps)
    return (x + y) / math.sqrt(2.0), (y - x) / math.sqrt(2.0)


@dataclass
class Decompositions:
    """
    phi = U A = B U and phi = L D Rm^-1.

    Attributes:
        U (np.ndarray): Orthogonal polar factor
        A (np.ndarray): Right stretch, symmetric positive-definite
        B (np.ndarray): Left stretch, B = U A U^-1
        L (np.ndarray): Left orthogonal factor, det L = +1
        D (np.ndarray): Diagonal, positive, descending
        Rm (np.ndarray): Right orthogonal factor
        degenerate (bool): Whether tied invariants forced the fallback branch
    """
    U: np.ndarray
    A: np.ndarray
    B: np.ndarray
    L: np.ndarray
    D: np.ndarray
    Rm: np.ndarray
    degenerate: bool = False

    def polar_residual(self) -> float:
        return float(np.max(np.abs(self.U @ self.A - self.B @ self.U)))

    def reconstruction_residual(self, phi) -> float:
        phi = np.asarray(phi, dtype=float)
        return float(max(
            np.max(np.abs(self.U @ self.A - phi)),
            np.max(np.abs(self.B @ self.U - phi)),
            np.max(np.abs(self.L @ self.D @ self.Rm.T - phi)),
        ))


def _normalize_columns(L: np.ndarray, Rm: np.ndarray) -> None:
    """Fix column signs in place: first nonzero entry positive, last column sets det L = +1."""
    n = L.shape[0]
    for k in range(n - 1):
        nonzero = np.flatnonzero(np.abs(L[:, k]) > 1e-14)
        if nonzero.size and L[nonzero[0], k] < 0.0:
            L[:, k] *= -1.0
            Rm[:, k] *= -1.0
    if np.linalg.det(L) < 0.0:
        L[:, -1] *= -1.0
        Rm[:, -1] *= -1.0


def polar_and_two_polar(phi) -> Decompositions:
    """
    Polar and two-polar decompositions of an invertible matrix.

    Distinct invariants fix L and Rm up to the sign rule. When two
    invariants coincide the decomposition is not unique; L is then taken
    as the orthogonal polar factor rotated by the eigenvectors of A
    (L = U when all invariants coincide).

    Args:
        phi: Square matrix with nonzero determinant

    Returns:
        Decompositions: Both factorizations

    Raises:
        SingularPhi: det phi = 0
    """
    phi = np.asarray(phi, dtype=float)
    if abs(np.linalg.det(phi)) < 1e-14 * max(1.0, np.max(np.abs(phi))) ** phi.shape[0]:
        raise SingularPhi("polar decomposition of a singular matrix")
    U, A = linalg.polar(phi, side="right")
    _, B = linalg.polar(phi, side="left")
    L, d, RmT = linalg.svd(phi)
    Rm = RmT.T.copy()
    gaps = -np.diff(d)
    degenerate = bool(gaps.size and np.min(gaps) <= _TIE_TOLERANCE * d[0])
    if degenerate:
        if np.max(d) - np.min(d) <= _TIE_TOLERANCE * d[0]:
            Q = np.eye(phi.shape[0])
        else:
            Q = np.linalg.eigh(0.5 * (A + A.T))[1][:, ::-1]
        L = U @ Q
        Rm = Q.copy()
        d = np.diag(Q.T @ A @ Q)
    else:
        L = L.copy()
        _normalize_columns(L, Rm)
    return Decompositions(U=U, A=A, B=B, L=L, D=np.diag(d), Rm=Rm, degenerate=degenerate)
