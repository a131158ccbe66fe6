"""
Affine connections on a chart: Levi-Civita symbols, torsion and contortion.

Conventions:
    S^i_jk = (Gamma^i_jk - Gamma^i_kj) / 2
    K^i_jk = S^i_jk + S_jk^i + S_kj^i,  S_jk^i = g_jl S^l_km g^mi
so that a metric connection decomposes as Gamma = {} + K.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..numdiff import FIRST_ORDER, NESTED, jacobian
from .charts import ManifoldChart, flat, metric_at


def christoffel_from_metric_derivative(g: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """
    Levi-Civita symbols from the metric and its first derivatives.

    Args:
        g (np.ndarray): Metric g_ij
        dg (np.ndarray): d_k g_ij stored as [i, j, k]

    Returns:
        np.ndarray: Gamma^i_jk as [i, j, k]
    """
    g_inv = np.linalg.inv(g)
    # T[l, j, k] = d_k g_lj + d_j g_lk - d_l g_jk
    T = dg + dg.transpose(0, 2, 1) - dg.transpose(2, 0, 1)
    return 0.5 * np.einsum("il,ljk->ijk", g_inv, T)


def metric_derivative_at(chart: ManifoldChart, point, exponent: float = FIRST_ORDER) -> np.ndarray:
    """d_k g_ij as [i, j, k]; closed form when the chart has one."""
    x = chart.check_point(point)
    if chart.metric_derivative_fn is not None:
        return np.asarray(chart.metric_derivative_fn(x), dtype=float)
    return jacobian(lambda y: np.asarray(chart.metric_fn(y), dtype=float), x, exponent)


def levi_civita_at(chart: ManifoldChart, point, exponent: float = FIRST_ORDER) -> np.ndarray:
    """
    Levi-Civita (Christoffel) symbols Gamma^i_jk.

    Built-in charts use closed forms; custom metrics are differentiated with
    the fourth-order stencil and step eps**exponent * max(1, |x|).

    Args:
        chart (ManifoldChart): Chart to evaluate
        point: Coordinates inside the chart domain
        exponent (float): Step exponent for numeric differentiation

    Returns:
        np.ndarray: Array of shape (n, n, n), symmetric in the lower pair
    """
    x = chart.check_point(point)
    if chart.christoffel_fn is not None:
        return np.asarray(chart.christoffel_fn(x), dtype=float)
    g = metric_at(chart, x)
    dg = metric_derivative_at(chart, x, exponent)
    return christoffel_from_metric_derivative(g, dg)


@dataclass(frozen=True)
class ConnectionField:
    """
    Affine connection over a chart.

    Attributes:
        chart (ManifoldChart): Underlying chart (supplies the metric)
        gamma_fn (Optional[Callable]): point -> Gamma^i_jk; None selects Levi-Civita
        gamma_derivative_fn (Optional[Callable]): point -> d_l Gamma^i_jk as [i, j, k, l]
        is_metric_compatible (bool): Whether nabla g = 0 is expected
        name (str): Label used in reports
    """
    chart: ManifoldChart
    gamma_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    gamma_derivative_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    is_metric_compatible: bool = True
    name: str = "levi-civita"

    @property
    def dim(self) -> int:
        return self.chart.dim

    @property
    def exact(self) -> bool:
        """True when Gamma is available to roundoff (no numeric metric derivatives)."""
        if self.gamma_fn is not None:
            return True
        return self.chart.christoffel_fn is not None or self.chart.metric_derivative_fn is not None

    def gamma(self, point, exponent: float = FIRST_ORDER) -> np.ndarray:
        """Connection coefficients Gamma^i_jk at a point."""
        if self.gamma_fn is None:
            return levi_civita_at(self.chart, point, exponent)
        x = self.chart.check_point(point)
        return np.asarray(self.gamma_fn(x), dtype=float)

    def smooth_gamma(self, point) -> np.ndarray:
        """Gamma evaluated with the step suited for differentiating it again."""
        return self.gamma(point, FIRST_ORDER if self.exact else NESTED)

    def gamma_derivative(self, point) -> np.ndarray:
        """d_l Gamma^i_jk as [i, j, k, l]."""
        x = self.chart.check_point(point)
        if self.gamma_derivative_fn is not None:
            return np.asarray(self.gamma_derivative_fn(x), dtype=float)
        if self.gamma_fn is None and self.chart.christoffel_derivative_fn is not None:
            return np.asarray(self.chart.christoffel_derivative_fn(x), dtype=float)
        exponent = FIRST_ORDER if self.exact else NESTED
        return jacobian(self.smooth_gamma, x, exponent)

    def metric(self, point) -> np.ndarray:
        return metric_at(self.chart, point)

    def torsion(self, point) -> np.ndarray:
        """S^i_jk = (Gamma^i_jk - Gamma^i_kj) / 2."""
        G = self.gamma(point)
        return 0.5 * (G - G.transpose(0, 2, 1))


def levi_civita_connection(chart: ManifoldChart) -> ConnectionField:
    """Levi-Civita connection of a chart's metric."""
    return ConnectionField(chart=chart)


def contortion_from_torsion(S: np.ndarray, g: np.ndarray) -> np.ndarray:
    """
    Contortion K^i_jk = S^i_jk + S_jk^i + S_kj^i.

    Args:
        S (np.ndarray): Torsion S^i_jk
        g (np.ndarray): Metric g_ij

    Returns:
        np.ndarray: K^i_jk as [i, j, k]
    """
    g_inv = np.linalg.inv(g)
    # T[j, k, i] = S_jk^i
    T = np.einsum("jl,lkm,mi->jki", g, S, g_inv)
    return S + T.transpose(2, 0, 1) + T.transpose(2, 1, 0)


def riemann_cartan_connection(chart: ManifoldChart, torsion_fn: Callable[[np.ndarray], np.ndarray],
                              name: str = "riemann-cartan") -> ConnectionField:
    """
    Metric connection with prescribed torsion: Gamma = {} + K(S).

    Args:
        chart (ManifoldChart): Chart supplying the metric
        torsion_fn (Callable): point -> S^i_jk (antisymmetric in j, k)
        name (str): Label for reports

    Returns:
        ConnectionField: The connection
    """
    def gamma(x):
        S = np.asarray(torsion_fn(x), dtype=float)
        return levi_civita_at(chart, x) + contortion_from_torsion(S, metric_at(chart, x))

    return ConnectionField(chart=chart, gamma_fn=gamma, is_metric_compatible=True, name=name)


def constant_torsion_flat3(c: float = 0.3) -> ConnectionField:
    """
    Synthetic Riemann-Cartan connection on flat(3) with S^1_23 = -S^1_32 = c.

    With a Cartesian metric the Levi-Civita part vanishes and Gamma = K.
    """
    chart = flat(3)
    S = np.zeros((3, 3, 3))
    S[0, 1, 2] = c
    S[0, 2, 1] = -c
    K = contortion_from_torsion(S, np.eye(3))
    return ConnectionField(
        chart=chart,
        gamma_fn=lambda x: K.copy(),
        gamma_derivative_fn=lambda x: np.zeros((3, 3, 3, 3)),
        is_metric_compatible=True,
        name="flat3-torsion",
    )


@dataclass
class TorsionContortion:
    """
    Torsion/contortion split of a connection at a point.

    Attributes:
        torsion (np.ndarray): S^i_jk
        contortion (np.ndarray): K^i_jk built from S and g
        difference (np.ndarray): Gamma - {} (equals K for metric connections)
        reconstruction_residual (float): max |Gamma - ({} + K)|
        antisymmetry_residual (float): max |K_ijk + K_jik|
    """
    torsion: np.ndarray
    contortion: np.ndarray
    difference: np.ndarray
    reconstruction_residual: float
    antisymmetry_residual: float


def torsion_contortion_at(connection: ConnectionField, point) -> TorsionContortion:
    """
    Torsion, contortion and difference tensor of a connection.

    Residuals are returned, never raised.

    Args:
        connection (ConnectionField): Connection to split
        point: Coordinates inside the chart domain

    Returns:
        TorsionContortion: The decomposition with its residuals
    """
    x = connection.chart.check_point(point)
    G = connection.gamma(x)
    g = connection.metric(x)
    lc = levi_civita_at(connection.chart, x)
    S = 0.5 * (G - G.transpose(0, 2, 1))
    K = contortion_from_torsion(S, g)
    K_low = np.einsum("il,ljk->ijk", g, K)
    return TorsionContortion(
        torsion=S,
        contortion=K,
        difference=G - lc,
        reconstruction_residual=float(np.max(np.abs(G - lc - K))),
        antisymmetry_residual=float(np.max(np.abs(K_low + K_low.transpose(1, 0, 2)))),
    )
