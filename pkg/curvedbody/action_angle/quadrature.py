"""
Turning points and action quadrature for one separated degree of freedom.

An integrand is the squared momentum p^2(q) along one coordinate. Between
two simple turning points the substitution
    q = mid + half * sin(u),  u in [-pi/2, pi/2]
turns the square-root endpoint behaviour into a smooth integrand, which
Gauss-Legendre then integrates to near machine precision.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq, minimize_scalar

from ..errors import NoClassicalRegion, QuadratureFailure, UnboundedMotion

logger = logging.getLogger(__name__)

Integrand = Callable[[float], float]

GRID_POINTS = 2001
NODE_LADDER = (64, 128, 256, 512, 1024)


@dataclass(frozen=True)
class TurningPoints:
    """
    Classical region of one coordinate.

    Attributes:
        lower (float): Smaller turning point
        upper (float): Larger turning point
        rotational (bool): True when the momentum never vanishes on a periodic coordinate
        period (float): Coordinate period for rotational motion
    """
    lower: float
    upper: float
    rotational: bool = False
    period: float = 0.0

    @property
    def width(self) -> float:
        return self.upper - self.lower


def _grid(a: float, b: float, margin: float, points: int) -> np.ndarray:
    return np.linspace(a + margin, b - margin, points)


def _evaluate(f: Integrand, grid: np.ndarray) -> np.ndarray:
    vals = np.array([f(q) for q in grid], dtype=float)
    vals[~np.isfinite(vals)] = -np.inf
    return vals


def _refine(f: Integrand, lo: float, hi: float) -> float:
    return brentq(f, lo, hi, xtol=1e-14, rtol=1e-12, maxiter=200)


def _runs(mask: np.ndarray):
    """Start/stop indices of contiguous True runs."""
    padded = np.concatenate([[False], mask, [False]])
    edges = np.flatnonzero(np.diff(padded.astype(int)))
    return list(zip(edges[::2], edges[1::2] - 1))


def turning_points(
    integrand: Integrand,
    interval: Tuple[float, float],
    margin: float = 1e-9,
    periodic: bool = False,
    hint: Optional[float] = None,
    points: int = GRID_POINTS,
) -> TurningPoints:
    """
    Locate the classical region of a squared-momentum function.

    Sign changes are bracketed on a uniform grid and refined with brentq to
    1e-12 relative. A region narrower than the grid spacing is found by
    maximising the integrand around its best grid value.

    Args:
        integrand (Callable): q -> p^2(q)
        interval (Tuple[float, float]): Search interval (one period if periodic)
        margin (float): Distance kept from non-periodic interval ends
        periodic (bool): Treat the coordinate as an angle of period b - a
        hint (Optional[float]): Preferred point when several regions exist
        points (int): Grid size

    Returns:
        TurningPoints: The region; lower == upper when it has zero width

    Raises:
        NoClassicalRegion: Integrand negative everywhere
        UnboundedMotion: Region reaches a non-periodic end of the interval
    """
    a, b = float(interval[0]), float(interval[1])
    period = b - a
    grid = np.linspace(a, b, points, endpoint=False) if periodic else _grid(a, b, margin, points)
    vals = _evaluate(integrand, grid)

    if periodic:
        if np.all(vals > 0.0):
            return TurningPoints(a, b, rotational=True, period=period)
        # restart the grid at the deepest forbidden point so no region wraps
        start = grid[int(np.argmin(vals))]
        grid = np.linspace(start, start + period, points + 1)
        vals = _evaluate(integrand, grid)

    positive = vals > 0.0
    if not np.any(positive):
        return _narrow_region(integrand, grid, vals)

    runs = _runs(positive)
    if len(runs) > 1:
        logger.warning("%d classical regions found; using one of them", len(runs))
    if hint is not None:
        chosen = min(runs, key=lambda r: 0.0 if grid[r[0]] <= hint <= grid[r[1]]
                     else min(abs(grid[r[0]] - hint), abs(grid[r[1]] - hint)))
    else:
        chosen = max(runs, key=lambda r: float(np.max(vals[r[0]:r[1] + 1])))
    i0, i1 = chosen
    if not periodic and (i0 == 0 or i1 == len(grid) - 1):
        end = grid[0] if i0 == 0 else grid[-1]
        raise UnboundedMotion(f"momentum stays real at the interval end q={end:.6g}")

    lower = _refine(integrand, grid[i0 - 1], grid[i0])
    upper = _refine(integrand, grid[i1], grid[i1 + 1])
    logger.debug("turning points %.15g, %.15g", lower, upper)
    return TurningPoints(lower, upper)


def _narrow_region(f: Integrand, grid: np.ndarray, vals: np.ndarray) -> TurningPoints:
    k = int(np.argmax(vals))
    if not np.isfinite(vals[k]):
        raise NoClassicalRegion("momentum is imaginary on the whole interval")
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(lambda q: -f(q), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-14})
    q_star, f_star = float(res.x), -float(res.fun)
    scale = max(1.0, float(np.max(np.abs(vals[np.isfinite(vals)]))))
    if f_star > 0.0 and f(lo) < 0.0 and f(hi) < 0.0:
        return TurningPoints(_refine(f, lo, q_star), _refine(f, q_star, hi))
    if f_star >= -1e-12 * scale:
        return TurningPoints(q_star, q_star)
    raise NoClassicalRegion(f"energy below the effective-potential minimum (max p^2 = {f_star:.3g})")


def _sine_substitution(values: Callable[[np.ndarray], np.ndarray], tp: TurningPoints, nodes: int) -> float:
    u, w = leggauss(nodes)
    u = 0.5 * math.pi * u
    w = 0.5 * math.pi * w
    mid = 0.5 * (tp.upper + tp.lower)
    half = 0.5 * tp.width
    q = mid + half * np.sin(u)
    return float(np.sum(w * values(q) * half * np.cos(u)))


def _converged(rule: Callable[[int], float], what: str) -> float:
    previous = rule(NODE_LADDER[0])
    for n in NODE_LADDER[1:]:
        current = rule(n)
        if abs(current - previous) <= 1e-10 * max(abs(current), 1e-300):
            return current
        previous = current
    raise QuadratureFailure(f"{what} did not converge with {NODE_LADDER[-1]} nodes")


def action_integral(integrand: Integrand, tp: TurningPoints) -> float:
    """
    Librational action J = 2 * integral of sqrt(p^2) between the turning points.

    Args:
        integrand (Callable): q -> p^2(q)
        tp (TurningPoints): Region from ``turning_points``

    Returns:
        float: The action; zero for a zero-width region

    Raises:
        QuadratureFailure: No convergence up to the largest node count
    """
    if tp.rotational:
        return full_period_action(integrand, tp.lower, tp.period)
    if tp.width <= 0.0:
        return 0.0

    def sqrt_p2(q):
        return np.sqrt(np.maximum([integrand(x) for x in q], 0.0))

    return 2.0 * _converged(lambda n: _sine_substitution(sqrt_p2, tp, n), "action quadrature")


def full_period_action(integrand: Integrand, start: float, period: float) -> float:
    """Rotational action: integral of sqrt(p^2) over one period (trapezoid rule, spectrally exact)."""

    def rule(n):
        q = start + period * np.arange(n) / n
        vals = np.sqrt(np.maximum([integrand(x) for x in q], 0.0))
        return float(period * np.mean(vals))

    return _converged(rule, "rotational action")


def inverse_root_integral(weight: Callable[[float], float], integrand: Integrand, tp: TurningPoints) -> float:
    """
    2 * integral of weight(q) / sqrt(p^2(q)) between the turning points.

    Used for the radial period and the angle swept in one radial period.
    """
    if tp.width <= 0.0:
        raise QuadratureFailure("zero-width classical region has no period")

    def ratio(q):
        p2 = np.array([integrand(x) for x in q])
        w = np.array([weight(x) for x in q])
        return w / np.sqrt(np.maximum(p2, 1e-300))

    return 2.0 * _converged(lambda n: _sine_substitution(ratio, tp, n), "period quadrature")
