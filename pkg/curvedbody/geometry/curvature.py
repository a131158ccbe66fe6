"""
Curvature of a connection and covariant derivatives along curves.

Curvature convention:
    R^a_bij = d_i Gamma^a_bj - d_j Gamma^a_bi
              + Gamma^a_ci Gamma^c_bj - Gamma^a_cj Gamma^c_bi
Ricci_bj = R^a_baj and the scalar curvature is g^bj Ricci_bj, positive on
the sphere.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import DimensionMismatch
from .connection import ConnectionField, metric_derivative_at


def curvature_at(connection: ConnectionField, point) -> np.ndarray:
    """
    Riemann tensor R^a_bij of a connection.

    Args:
        connection (ConnectionField): Connection to differentiate
        point: Coordinates inside the chart domain

    Returns:
        np.ndarray: Array [a, b, i, j], antisymmetric in (i, j)
    """
    x = connection.chart.check_point(point)
    G = connection.smooth_gamma(x)
    dG = connection.gamma_derivative(x)  # [a, b, j, i] = d_i Gamma^a_bj
    R = dG.transpose(0, 1, 3, 2) - dG
    R = R + np.einsum("aci,cbj->abij", G, G) - np.einsum("acj,cbi->abij", G, G)
    return R


def ricci_at(connection: ConnectionField, point) -> np.ndarray:
    """Ricci tensor Ricci_bj = R^a_baj."""
    return np.einsum("abaj->bj", curvature_at(connection, point))


def scalar_curvature_at(connection: ConnectionField, point) -> float:
    """Scalar curvature g^bj Ricci_bj."""
    g_inv = np.linalg.inv(connection.metric(point))
    return float(np.einsum("bj,bj->", g_inv, ricci_at(connection, point)))


@dataclass
class CurvatureField:
    """
    Curvature evaluators bound to a connection.

    Attributes:
        connection (ConnectionField): Source connection
    """
    connection: ConnectionField

    def riemann(self, point) -> np.ndarray:
        return curvature_at(self.connection, point)

    def scalar(self, point) -> float:
        return scalar_curvature_at(self.connection, point)

    def lowered(self, point) -> np.ndarray:
        """R_abij = g_ac R^c_bij."""
        return np.einsum("ac,cbij->abij", self.connection.metric(point), self.riemann(point))


def metric_compatibility_residual(connection: ConnectionField, point) -> float:
    """
    max |nabla_k g_ij| with nabla_k g_ij = d_k g_ij - Gamma^l_ik g_lj - Gamma^l_jk g_il.
    """
    x = connection.chart.check_point(point)
    g = connection.metric(x)
    dg = metric_derivative_at(connection.chart, x)
    G = connection.gamma(x)
    nabla = dg - np.einsum("lik,lj->ijk", G, g) - np.einsum("ljk,il->ijk", G, g)
    return float(np.max(np.abs(nabla)))


def covariant_derivative_along(
    connection: ConnectionField,
    curve_point,
    curve_velocity,
    vector,
    vector_rate=None,
) -> np.ndarray:
    """
    Covariant time derivative DX/dt = dX/dt + Gamma^i_jk X^j dx^k/dt.

    Args:
        connection (ConnectionField): Connection used for transport
        curve_point: Point x(t) of the curve
        curve_velocity: Tangent dx/dt
        vector: Vector X attached at x(t)
        vector_rate: Sampled dX/dt (zero when omitted)

    Returns:
        np.ndarray: DX/dt

    Raises:
        DimensionMismatch: When the arrays do not match the chart dimension
    """
    n = connection.dim
    v = np.asarray(curve_velocity, dtype=float)
    X = np.asarray(vector, dtype=float)
    dX = np.zeros(n) if vector_rate is None else np.asarray(vector_rate, dtype=float)
    for label, arr in (("curve_velocity", v), ("vector", X), ("vector_rate", dX)):
        if arr.shape != (n,):
            raise DimensionMismatch(f"{label} must have shape ({n},), got {arr.shape}")
    G = connection.gamma(curve_point)
    return dX + np.einsum("ijk,j,k->i", G, X, v)


def transport_callback(connection: ConnectionField) -> Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]:
    """
    Parallel-transport right-hand side for use inside integrators.

    Returns:
        Callable: (x, dx/dt, X) -> dX/dt that keeps DX/dt = 0
    """
    def rhs(x, xdot, X):
        return -np.einsum("ijk,j,k->i", connection.gamma(x), X, xdot)
    return rhs
