"""
Coordinate charts of the built-in manifolds.

A chart bundles a metric evaluator with optional closed-form Christoffel
symbols and their derivatives. Index order follows ``Gamma[i, j, k]`` for
Gamma^i_jk, where the LAST lower index is the direction of differentiation:
``(nabla_k X)^i = d_k X^i + Gamma^i_jk X^j``.

Charts provided:
- sphere2(R): coordinates (r, phi), g = diag(1, R^2 sin^2(r/R))
- pseudosphere2(R): coordinates (r, phi), g = diag(1, R^2 sh^2(r/R))
- torus2(L, R): coordinates (theta, phi), g = diag(R^2, (L + R cos theta)^2)
- sphere3(R): normal coordinates r-bar on S^3(0, R)
- flat(n): Cartesian coordinates
- custom: any user metric, differentiated numerically
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from ..errors import BadParams, DimensionMismatch, SingularPoint, UnsupportedChart

DEFAULT_MARGIN = 1e-6

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ManifoldChart:
    """
    A named chart with metric and connection evaluators.

    Attributes:
        name (str): Chart identifier (sphere2, pseudosphere2, torus2, sphere3, flat, custom)
        dim (int): Number of coordinates
        params (Dict[str, float]): Length parameters (R, L, ...)
        coordinates (Tuple[str, ...]): Coordinate labels
        metric_fn (ArrayFn): point -> g_ij
        christoffel_fn (Optional[ArrayFn]): point -> Gamma^i_jk in closed form
        christoffel_derivative_fn (Optional[ArrayFn]): point -> d_l Gamma^i_jk as [i, j, k, l]
        metric_derivative_fn (Optional[ArrayFn]): point -> d_k g_ij as [i, j, k]
        domain_fn (Optional[Callable]): (point, margin) -> reason string when inadmissible
        singular_loci (Tuple[str, ...]): Human-readable excluded loci
        margin (float): Distance kept from excluded loci
    """
    name: str
    dim: int
    params: Dict[str, float]
    coordinates: Tuple[str, ...]
    metric_fn: ArrayFn
    christoffel_fn: Optional[ArrayFn] = None
    christoffel_derivative_fn: Optional[ArrayFn] = None
    metric_derivative_fn: Optional[ArrayFn] = None
    domain_fn: Optional[Callable[[np.ndarray, float], Optional[str]]] = None
    singular_loci: Tuple[str, ...] = ()
    margin: float = DEFAULT_MARGIN
    sampling_box: Tuple[Tuple[float, float], ...] = field(default=())

    def check_point(self, point) -> np.ndarray:
        """
        Validate a point against the chart domain.

        Args:
            point: Coordinate tuple

        Returns:
            np.ndarray: The point as a float array

        Raises:
            DimensionMismatch: Wrong number of coordinates
            SingularPoint: Point within the margin of an excluded locus
        """
        x = np.asarray(point, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionMismatch(f"{self.name} expects {self.dim} coordinates, got shape {x.shape}")
        if self.domain_fn is not None:
            reason = self.domain_fn(x, self.margin)
            if reason:
                raise SingularPoint(f"{self.name}: {reason} at {x.tolist()}")
        return x

    def sample_point(self, rng: np.random.Generator) -> np.ndarray:
        """Draw a point uniformly from the chart's sampling box."""
        lo = np.array([b[0] for b in self.sampling_box])
        hi = np.array([b[1] for b in self.sampling_box])
        return rng.uniform(lo, hi)


def metric_at(chart: ManifoldChart, point) -> np.ndarray:
    """
    Evaluate the metric g_ij.

    Args:
        chart (ManifoldChart): Chart to evaluate
        point: Coordinates inside the chart domain

    Returns:
        np.ndarray: Symmetric n x n matrix
    """
    x = chart.check_point(point)
    return np.asarray(chart.metric_fn(x), dtype=float)


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not value > 0.0 or not math.isfinite(value):
        raise BadParams(f"{name} must be positive, got {value}")
    return value


def sphere2(R: float = 1.0, margin: float = DEFAULT_MARGIN) -> ManifoldChart:
    """Two-sphere of radius R in geodesic polar coordinates (r, phi)."""
    R = _positive("R", R)

    def metric(x):
        w = R * math.sin(x[0] / R)
        return np.diag([1.0, w * w])

    def christoffel(x):
        u = x[0] / R
        G = np.zeros((2, 2, 2))
        G[0, 1, 1] = -0.5 * R * math.sin(2.0 * u)
        G[1, 0, 1] = G[1, 1, 0] = math.cos(u) / (R * math.sin(u))
        return G

    def christoffel_derivative(x):
        u = x[0] / R
        dG = np.zeros((2, 2, 2, 2))
        dG[0, 1, 1, 0] = -math.cos(2.0 * u)
        dG[1, 0, 1, 0] = dG[1, 1, 0, 0] = -1.0 / (R * R * math.sin(u) ** 2)
        return dG

    def domain(x, m):
        if not m < x[0] < math.pi * R - m:
            return "r must lie strictly between the poles 0 and pi*R"
        return None

    return ManifoldChart(
        name="sphere2", dim=2, params={"R": R}, coordinates=("r", "phi"),
        metric_fn=metric, christoffel_fn=christoffel,
        christoffel_derivative_fn=christoffel_derivative, domain_fn=domain,
        singular_loci=("r = 0", "r = pi R"), margin=margin,
        sampling_box=((0.1 * math.pi * R, 0.9 * math.pi * R), (-math.pi, math.pi)),
    )


def pseudosphere2(R: float = 1.0, margin: float = DEFAULT_MARGIN) -> ManifoldChart:
    """Hyperboloid sheet of radius R in geodesic polar coordinates (r, phi)."""
    R = _positive("R", R)

    def metric(x):
        w = R * math.sinh(x[0] / R)
        return np.diag([1.0, w * w])

    def christoffel(x):
        u = x[0] / R
        G = np.zeros((2, 2, 2))
        G[0, 1, 1] = -0.5 * R * math.sinh(2.0 * u)
        G[1, 0, 1] = G[1, 1, 0] = math.cosh(u) / (R * math.sinh(u))
        return G

    def christoffel_derivative(x):
        u = x[0] / R
        dG = np.zeros((2, 2, 2, 2))
        dG[0, 1, 1, 0] = -math.cosh(2.0 * u)
        dG[1, 0, 1, 0] = dG[1, 1, 0, 0] = -1.0 / (R * R * math.sinh(u) ** 2)
        return dG

    def domain(x, m):
        if not x[0] > m:
            return "r must be positive (origin of polar coordinates excluded)"
        return None

    return ManifoldChart(
        name="pseudosphere2", dim=2, params={"R": R}, coordinates=("r", "phi"),
        metric_fn=metric, christoffel_fn=christoffel,
        christoffel_derivative_fn=christoffel_derivative, domain_fn=domain,
        singular_loci=("r = 0",), margin=margin,
        sampling_box=((0.1 * R, 2.0 * R), (-math.pi, math.pi)),
    )


def torus2(L: float = 2.0, R: float = 1.0, margin: float = DEFAULT_MARGIN) -> ManifoldChart:
    """Embedded torus with tube radius R and centre-line radius L > R, coordinates (theta, phi)."""
    R = _positive("R", R)
    L = _positive("L", L)
    if not L > R:
        raise BadParams(f"L must exceed R (got L={L}, R={R})")

    def metric(x):
        w = L + R * math.cos(x[0])
        return np.diag([R * R, w * w])

    def christoffel(x):
        s, c = math.sin(x[0]), math.cos(x[0])
        w = L + R * c
        G = np.zeros((2, 2, 2))
        G[0, 1, 1] = (L / R + c) * s
        G[1, 0, 1] = G[1, 1, 0] = -R * s / w
        return G

    def christoffel_derivative(x):
        s, c = math.sin(x[0]), math.cos(x[0])
        w = L + R * c
        dG = np.zeros((2, 2, 2, 2))
        dG[0, 1, 1, 0] = (L / R + c) * c - s * s
        dG[1, 0, 1, 0] = dG[1, 1, 0, 0] = -R * (L * c + R) / (w * w)
        return dG

    return ManifoldChart(
        name="torus2", dim=2, params={"L": L, "R": R}, coordinates=("theta", "phi"),
        metric_fn=metric, christoffel_fn=christoffel,
        christoffel_derivative_fn=christoffel_derivative, domain_fn=None,
        singular_loci=(), margin=margin,
        sampling_box=((-math.pi, math.pi), (-math.pi, math.pi)),
    )


# S^3 radial profile helpers, x = |r|/R.
# h(x) = (x^2 - sin^2 x) / x^4 and h'(x)/x, series below the switch point.
_SERIES_SWITCH = 0.1
_N_TERMS = 12


def _h(x: float) -> float:
    if x < _SERIES_SWITCH:
        return sum(
            (-1) ** n * 2.0 ** (2 * n - 1) * x ** (2 * n - 4) / math.factorial(2 * n)
            for n in range(2, _N_TERMS)
        )
    return (x * x - math.sin(x) ** 2) / x ** 4


def _h_prime_over_x(x: float) -> float:
    if x < _SERIES_SWITCH:
        return sum(
            (-1) ** n * 2.0 ** (2 * n - 1) * (2 * n - 4) * x ** (2 * n - 6) / math.factorial(2 * n)
            for n in range(3, _N_TERMS)
        )
    return (2.0 * x - math.sin(2.0 * x)) / x ** 5 - 4.0 * (x * x - math.sin(x) ** 2) / x ** 6


def sphere3(R: float = 1.0, margin: float = DEFAULT_MARGIN) -> ManifoldChart:
    """
    Three-sphere S^3(0, R) in normal coordinates r-bar, |r-bar| = r.

    The metric is g = A delta + (1 - A) n n^T with A = (R sin(r/R) / r)^2.
    The origin is regular; only the antipode |r-bar| = pi R is excluded.
    """
    R = _positive("R", R)

    def metric(x):
        rho = float(np.linalg.norm(x))
        u = rho / R
        A = np.sinc(u / math.pi) ** 2
        f = _h(u) / (R * R)
        return A * np.eye(3) + f * np.outer(x, x)

    def metric_derivative(x):
        rho = float(np.linalg.norm(x))
        u = rho / R
        h = _h(u)
        hx = _h_prime_over_x(u)
        a1 = (-2.0 * h - u * u * hx) / (R * R)
        f = h / (R * R)
        f1 = hx / R ** 4
        eye = np.eye(3)
        dg = (
            a1 * np.einsum("ij,k->ijk", eye, x)
            + f1 * np.einsum("i,j,k->ijk", x, x, x)
            + f * (np.einsum("ik,j->ijk", eye, x) + np.einsum("jk,i->ijk", eye, x))
        )
        return dg

    def domain(x, m):
        if not np.linalg.norm(x) < math.pi * R - m:
            return "|r| must stay below pi*R (antipodal point excluded)"
        return None

    half = 0.5 * math.pi * R / math.sqrt(3.0)
    return ManifoldChart(
        name="sphere3", dim=3, params={"R": R}, coordinates=("x1", "x2", "x3"),
        metric_fn=metric, metric_derivative_fn=metric_derivative, domain_fn=domain,
        singular_loci=("|r| = pi R",), margin=margin,
        sampling_box=((-half, half),) * 3,
    )


def flat(n: int = 2) -> ManifoldChart:
    """Euclidean space in Cartesian coordinates."""
    n = int(n)
    if not 1 <= n <= 4:
        raise BadParams(f"flat chart dimension must be 1..4, got {n}")
    return ManifoldChart(
        name="flat", dim=n, params={"n": float(n)},
        coordinates=tuple(f"x{i + 1}" for i in range(n)),
        metric_fn=lambda x: np.eye(n),
        christoffel_fn=lambda x: np.zeros((n, n, n)),
        christoffel_derivative_fn=lambda x: np.zeros((n, n, n, n)),
        sampling_box=((-1.0, 1.0),) * n,
    )


def custom(
    metric_fn: ArrayFn,
    dim: int,
    name: str = "custom",
    domain_fn: Optional[Callable[[np.ndarray, float], Optional[str]]] = None,
    sampling_box: Tuple[Tuple[float, float], ...] = (),
    margin: float = DEFAULT_MARGIN,
) -> ManifoldChart:
    """
    Chart for a user-supplied metric treated as a black box.

    Christoffel symbols are obtained by central differences of ``metric_fn``.
    """
    if not 1 <= int(dim) <= 4:
        raise BadParams(f"custom chart dimension must be 1..4, got {dim}")
    return ManifoldChart(
        name=name, dim=int(dim), params={},
        coordinates=tuple(f"x{i + 1}" for i in range(int(dim))),
        metric_fn=metric_fn, domain_fn=domain_fn, margin=margin,
        sampling_box=sampling_box or ((-1.0, 1.0),) * int(dim),
    )


def chart_from_name(name: str, margin: float = DEFAULT_MARGIN, **params) -> ManifoldChart:
    """
    Build a built-in chart from its name and parameters.

    Args:
        name (str): sphere2, pseudosphere2, torus2, sphere3 or flat
        margin (float): Singular-locus margin
        **params: R, L or n as required by the chart

    Returns:
        ManifoldChart: The chart
    """
    if name == "sphere2":
        return sphere2(params.get("R", 1.0), margin)
    if name == "pseudosphere2":
        return pseudosphere2(params.get("R", 1.0), margin)
    if name == "torus2":
        return torus2(params.get("L", 2.0), params.get("R", 1.0), margin)
    if name == "sphere3":
        return sphere3(params.get("R", 1.0), margin)
    if name == "flat":
        return flat(int(params.get("n", 2)))
    raise UnsupportedChart(f"unknown chart {name!r}")


BUILTIN_CHARTS = ("sphere2", "pseudosphere2", "torus2", "sphere3", "flat")
