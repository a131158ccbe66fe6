"""
Frame fields and the objects built from them.

A frame is stored as its legs matrix ``E[i, A]`` (component i of leg E_A);
the coframe is the inverse matrix ``E^A_i``. Aholonomic connection
coefficients follow nabla_{E_C} E_B = Gamma^A_BC E_A.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..errors import SingularFrame, UnsupportedChart
from ..geometry.charts import ManifoldChart, metric_at
from ..geometry.connection import ConnectionField
from ..numdiff import jacobian

logger = logging.getLogger(__name__)

_SERIES_SWITCH = 1e-2


@dataclass(frozen=True)
class FrameField:
    """
    Field of linear frames over a chart.

    Attributes:
        chart (ManifoldChart): Base chart
        legs_fn (Callable): point -> E[i, A]
        orthonormal (bool): Whether g(E_A, E_B) = delta_AB is expected
        name (str): Label, e.g. "polar", "left", "right"
        legs_derivative_fn (Optional[Callable]): point -> d_k E^i_A as [i, A, k]
    """
    chart: ManifoldChart
    legs_fn: Callable[[np.ndarray], np.ndarray]
    orthonormal: bool = True
    name: str = "frame"
    legs_derivative_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None

    @property
    def dim(self) -> int:
        return self.chart.dim

    def legs(self, point) -> np.ndarray:
        x = self.chart.check_point(point)
        return np.asarray(self.legs_fn(x), dtype=float)

    def coframe(self, point) -> np.ndarray:
        """E^A_i, the matrix inverse of the legs."""
        E = self.legs(point)
        if abs(np.linalg.det(E)) < 1e-14 * max(1.0, np.linalg.norm(E)) ** E.shape[0]:
            raise SingularFrame(f"{self.name} frame is singular at {np.asarray(point).tolist()}")
        return np.linalg.inv(E)

    def legs_derivative(self, point) -> np.ndarray:
        """d_k E^i_A as [i, A, k]."""
        x = self.chart.check_point(point)
        if self.legs_derivative_fn is not None:
            return np.asarray(self.legs_derivative_fn(x), dtype=float)
        return jacobian(self.legs_fn, x)

    def coframe_derivative(self, point) -> np.ndarray:
        """d_k E^A_i as [A, i, k], differentiating the inverted legs directly."""
        x = self.chart.check_point(point)
        return jacobian(lambda y: np.linalg.inv(self.legs_fn(y)), x)

    def duality_residual(self, point) -> float:
        return float(np.max(np.abs(self.coframe(point) @ self.legs(point) - np.eye(self.dim))))

    def orthonormality_residual(self, point) -> float:
        E = self.legs(point)
        return float(np.max(np.abs(E.T @ metric_at(self.chart, point) @ E - np.eye(self.dim))))


def _polar_frame(chart: ManifoldChart, w: Callable[[float], float], dw: Callable[[float], float]) -> FrameField:
    # E_r = d_r, E_phi = (1/w) d_phi
    def legs(x):
        return np.array([[1.0, 0.0], [0.0, 1.0 / w(x[0])]])

    def legs_derivative(x):
        d = np.zeros((2, 2, 2))
        d[1, 1, 0] = -dw(x[0]) / w(x[0]) ** 2
        return d

    return FrameField(chart, legs, True, "polar", legs_derivative)


def _cot_ratio(x: float) -> float:
    """(1 - x cot x) / x^2."""
    if x < _SERIES_SWITCH:
        return 1.0 / 3.0 + x * x / 45.0 + 2.0 * x ** 4 / 945.0
    return (1.0 - x / math.tan(x)) / (x * x)


def _sin2_ratio(x: float) -> float:
    """(1 - sin(2x) / (2x)) / x^2."""
    if x < _SERIES_SWITCH:
        return 2.0 / 3.0 - 2.0 * x * x / 15.0 + 4.0 * x ** 4 / 315.0
    return (1.0 - math.sin(2.0 * x) / (2.0 * x)) / (x * x)


def _cross_matrix(v: np.ndarray) -> np.ndarray:
    """[v]x such that [v]x w = v x w."""
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def sphere3_legs(R: float, point, side: str = "left") -> np.ndarray:
    """
    Legs of the left/right invariant frame on S^3(0, R) in normal coordinates.

    E = c I + (1 - c) n n^T -+ (1/R)[r]x with c = (r/R) cot(r/R); the
    upper sign is the left frame.
    """
    rv = np.asarray(point, dtype=float)
    x = float(np.linalg.norm(rv)) / R
    sign = -1.0 if side == "left" else 1.0
    ratio = _cot_ratio(x)
    c = 1.0 - x * x * ratio
    return c * np.eye(3) + ratio * np.outer(rv, rv) / (R * R) + sign * _cross_matrix(rv) / R


def sphere3_coframe(R: float, point, side: str = "left") -> np.ndarray:
    """
    Coframe of the left/right invariant frame on S^3(0, R).

    E^A = a I + (1 - a) n n^T +- sinc^2(r/R) (1/R)[r]x with a = sin(2r/R) / (2r/R).
    """
    rv = np.asarray(point, dtype=float)
    x = float(np.linalg.norm(rv)) / R
    sign = 1.0 if side == "left" else -1.0
    ratio = _sin2_ratio(x)
    a = 1.0 - x * x * ratio
    s = np.sinc(x / math.pi)
    return a * np.eye(3) + ratio * np.outer(rv, rv) / (R * R) + sign * s * s * _cross_matrix(rv) / R


def builtin_frame(chart: ManifoldChart, side: str = "left") -> FrameField:
    """
    Normalized coordinate frame of a built-in chart.

    2-D charts use E_r = d_r, E_phi = (1/w) d_phi with w = R sin(r/R) or
    R sh(r/R). The torus frame is ordered (E_phi, E_theta) so that it is
    positively oriented against the outward normal. sphere3 returns the
    left or right invariant frame.

    Args:
        chart (ManifoldChart): A built-in chart
        side (str): "left" or "right" for sphere3

    Returns:
        FrameField: The frame

    Raises:
        UnsupportedChart: For custom charts
    """
    if chart.name == "sphere2":
        R = chart.params["R"]
        return _polar_frame(chart, lambda r: R * math.sin(r / R), lambda r: math.cos(r / R))
    if chart.name == "pseudosphere2":
        R = chart.params["R"]
        return _polar_frame(chart, lambda r: R * math.sinh(r / R), lambda r: math.cosh(r / R))
    if chart.name == "torus2":
        L, R = chart.params["L"], chart.params["R"]

        def legs(x):
            w = L + R * math.cos(x[0])
            return np.array([[0.0, 1.0 / R], [1.0 / w, 0.0]])

        def legs_derivative(x):
            w = L + R * math.cos(x[0])
            d = np.zeros((2, 2, 2))
            d[1, 0, 0] = R * math.sin(x[0]) / (w * w)
            return d

        return FrameField(chart, legs, True, "torus", legs_derivative)
    if chart.name == "sphere3":
        if side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {side!r}")
        R = chart.params["R"]
        return FrameField(chart, lambda x: sphere3_legs(R, x, side), True, side)
    if chart.name == "flat":
        n = chart.dim
        return FrameField(chart, lambda x: np.eye(n), True, "cartesian",
                          lambda x: np.zeros((n, n, n)))
    raise UnsupportedChart(
        f"no built-in frame for chart {chart.name!r}; supply a FrameField or use gram_schmidt_frame"
    )


def gram_schmidt_frame(chart: ManifoldChart) -> FrameField:
    """
    Orthonormal frame from Gram-Schmidt on the coordinate basis.

    With g = U^T U (Cholesky), the legs U^-1 satisfy E^T g E = 1.
    """
    def legs(x):
        U = np.linalg.cholesky(np.asarray(chart.metric_fn(x), dtype=float)).T
        return np.linalg.inv(U)

    return FrameField(chart, legs, True, "gram-schmidt")


def aholonomic_connection(frame: FrameField, connection: ConnectionField, point) -> np.ndarray:
    """
    Connection coefficients in the frame: Gamma^A_BC with nabla_{E_C} E_B = Gamma^A_BC E_A.

    Gamma^A_BC = E^A_i (d_k E^i_B + Gamma^i_jk E^j_B) E^k_C

    Args:
        frame (FrameField): Reference frame
        connection (ConnectionField): Affine connection
        point: Coordinates inside the chart domain

    Returns:
        np.ndarray: Array [A, B, C]
    """
    E = frame.legs(point)
    C = frame.coframe(point)
    dE = frame.legs_derivative(point)
    G = connection.gamma(point)
    nabla = dE + np.einsum("ijk,jB->iBk", G, E)
    return np.einsum("Ai,iBk,kC->ABC", C, nabla, E)


@dataclass
class TeleparallelObjects:
    """
    Objects induced by a frame field.

    Attributes:
        gamma (np.ndarray): Teleparallel connection Gamma[E]^i_jk = E^i_A d_k E^A_j
        torsion (np.ndarray): Its antisymmetric part S[E]^i_jk
        omega (np.ndarray): Aholonomy object Omega^A_BC = <E^A, [E_B, E_C]> from Lie brackets
        omega_from_coframe (np.ndarray): Omega^A_BC from the coframe exterior derivative
        parallel_residual (float): max |nabla[Gamma[E]] E_A|
    """
    gamma: np.ndarray
    torsion: np.ndarray
    omega: np.ndarray
    omega_from_coframe: np.ndarray
    parallel_residual: float


def teleparallel_objects(frame: FrameField, point) -> TeleparallelObjects:
    """
    Teleparallel connection, its torsion and the aholonomy object.

    Omega is computed twice, once from Lie brackets of the legs and once
    from the exterior derivative of the coframe, so the two can be compared.
    """
    E = frame.legs(point)
    C = frame.coframe(point)
    dE = frame.legs_derivative(point)          # [i, A, k]
    dC = frame.coframe_derivative(point)       # [A, j, k]
    gamma = np.einsum("iA,Ajk->ijk", E, dC)
    torsion = 0.5 * (gamma - gamma.transpose(0, 2, 1))
    # [E_B, E_C]^i = E^j_B d_j E^i_C - E^j_C d_j E^i_B
    bracket = np.einsum("jB,iCj->iBC", E, dE) - np.einsum("jC,iBj->iBC", E, dE)
    omega = np.einsum("Ai,iBC->ABC", C, bracket)
    # d E^A (E_B, E_C) = -<E^A, [E_B, E_C]>
    curl = dC.transpose(0, 2, 1) - dC          # [A, j, k] = d_j E^A_k - d_k E^A_j
    omega_cf = -np.einsum("Ajk,jB,kC->ABC", curl, E, E)
    parallel = dE + np.einsum("ijk,jA->iAk", gamma, E)
    return TeleparallelObjects(
        gamma=gamma,
        torsion=torsion,
        omega=omega,
        omega_from_coframe=omega_cf,
        parallel_residual=float(np.max(np.abs(parallel))),
    )
