"""
Left and right invariant frames on S^3(0, R) = SU(2) and the metric checks built on them.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict

import numpy as np

from ..frames.fields import sphere3_coframe, sphere3_legs
from ..geometry.charts import sphere3
from ..numdiff import jacobian
from .groups import hat

logger = logging.getLogger(__name__)

_EPS3 = np.zeros((3, 3, 3))
_EPS3[0, 1, 2] = _EPS3[1, 2, 0] = _EPS3[2, 0, 1] = 1.0
_EPS3[0, 2, 1] = _EPS3[2, 1, 0] = _EPS3[1, 0, 2] = -1.0


def levi_civita_symbol() -> np.ndarray:
    return _EPS3.copy()


@dataclass
class InvariantFrames:
    """
    Invariant frames at a point of S^3(0, R), in normal coordinates.

    Attributes:
        left (np.ndarray): Left legs [i, A]
        right (np.ndarray): Right legs [i, A]
        left_coframe (np.ndarray): [A, i]
        right_coframe (np.ndarray): [A, i]
        generators (np.ndarray): D_A = eps_ABC x^B d_C as columns [i, A]
    """
    left: np.ndarray
    right: np.ndarray
    left_coframe: np.ndarray
    right_coframe: np.ndarray
    generators: np.ndarray


def invariant_frames(R: float, point) -> InvariantFrames:
    """
    Left and right invariant frames with their coframes.

    Args:
        R (float): Radius of S^3
        point: Normal coordinates r-bar, |r-bar| < pi R

    Returns:
        InvariantFrames: Frames, coframes and the rotation generators
    """
    x = sphere3(R).check_point(point)
    return InvariantFrames(
        left=sphere3_legs(R, x, "left"),
        right=sphere3_legs(R, x, "right"),
        left_coframe=sphere3_coframe(R, x, "left"),
        right_coframe=sphere3_coframe(R, x, "right"),
        generators=-hat(x),
    )


def lie_bracket_constants(R: float, point, first: str = "left", second: str = "left") -> np.ndarray:
    """
    Structure functions c[A, B, C] with [E_A, F_B] = c^C_AB E_C.

    E and F are the ``first`` and ``second`` invariant frames; the bracket
    is expanded in the ``first`` frame.
    """
    x = np.asarray(point, dtype=float)
    E = sphere3_legs(R, x, first)
    F = sphere3_legs(R, x, second)
    dE = jacobian(lambda y: sphere3_legs(R, y, first), x)    # [i, A, k]
    dF = jacobian(lambda y: sphere3_legs(R, y, second), x)
    # [E_A, F_B]^i = E^j_A d_j F^i_B - F^j_B d_j E^i_A
    bracket = np.einsum("jA,iBj->iAB", E, dF) - np.einsum("jB,iAj->iAB", F, dE)
    return np.einsum("Ci,iAB->ABC", sphere3_coframe(R, x, first), bracket)


def flat_limit_deviation(R: float, point) -> float:
    """max |E - 1| over both invariant frames at fixed r-bar."""
    frames = invariant_frames(R, point)
    return float(max(np.max(np.abs(frames.left - np.eye(3))), np.max(np.abs(frames.right - np.eye(3)))))


def _embedding_jacobian(R: float, x: np.ndarray) -> np.ndarray:
    """d X / d r-bar for X = (R cos(r/R), R sin(r/R) n) in R^4."""
    rho = float(np.linalg.norm(x))
    u = rho / R
    # X_vec = s(rho) r-bar with s = R sin(rho/R) / rho
    if u < 1e-4:
        s = 1.0 - u * u / 6.0
        ds_over_rho = (-1.0 / 3.0 + u * u / 30.0) / (R * R)
        d0_over_rho = -(1.0 - u * u / 6.0) / R
    else:
        s = R * math.sin(u) / rho
        ds_over_rho = (math.cos(u) / rho - R * math.sin(u) / rho ** 2) / rho
        d0_over_rho = -math.sin(u) / rho
    J = np.zeros((4, 3))
    J[0] = d0_over_rho * x
    J[1:] = s * np.eye(3) + ds_over_rho * np.outer(x, x)
    return J


def _spherical_metric(R: float, x: np.ndarray) -> np.ndarray:
    """dr^2 + R^2 sin^2(r/R)(d theta^2 + sin^2 theta d phi^2) pulled back to r-bar."""
    rho = float(np.linalg.norm(x))
    theta = math.acos(x[2] / rho)
    rxy = math.hypot(x[0], x[1])
    J = np.zeros((3, 3))
    J[0] = x / rho
    J[1] = np.array([x[0] * x[2] / rxy, x[1] * x[2] / rxy, -rxy]) / (rho * rho)
    J[2] = np.array([-x[1], x[0], 0.0]) / (rxy * rxy)
    w = R * math.sin(rho / R)
    return J.T @ np.diag([1.0, w * w, (w * math.sin(theta)) ** 2]) @ J


def s3_metric_check(R: float, samples: int = 100, rng: np.random.Generator = None) -> Dict[str, float]:
    """
    Compare the S^3 metric obtained four ways at random points.

    Returns:
        Dict[str, float]: Maximum componentwise differences for
        left vs right frame metric, left frame vs closed form, R^4 embedding
        pull-back vs closed form, and the (r, theta, phi) form vs closed form.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    chart = sphere3(R)
    report = {"left_vs_right": 0.0, "left_vs_closed": 0.0, "embedding_vs_closed": 0.0, "spherical_vs_closed": 0.0}
    for _ in range(samples):
        x = chart.sample_point(rng)
        closed = chart.metric_fn(x)
        lc = sphere3_coframe(R, x, "left")
        rc = sphere3_coframe(R, x, "right")
        gl, gr = lc.T @ lc, rc.T @ rc
        J = _embedding_jacobian(R, x)
        report["left_vs_right"] = max(report["left_vs_right"], float(np.max(np.abs(gl - gr))))
        report["left_vs_closed"] = max(report["left_vs_closed"], float(np.max(np.abs(gl - closed))))
        report["embedding_vs_closed"] = max(report["embedding_vs_closed"], float(np.max(np.abs(J.T @ J - closed))))
        report["spherical_vs_closed"] = max(report["spherical_vs_closed"],
                                            float(np.max(np.abs(_spherical_metric(R, x) - closed))))
    logger.info("S^3 metric check over %d samples (R=%s): %s", samples, R, report)
    return report
