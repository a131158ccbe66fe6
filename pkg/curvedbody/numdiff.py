"""
Central-difference helpers.

All derivatives use the fourth-order stencil
``[f(x-2h) - 8 f(x-h) + 8 f(x+h) - f(x+2h)] / (12 h)`` and append the
derivative index as the LAST axis of the result, so ``d[..., k]`` is the
derivative along coordinate ``k``.
"""

from typing import Callable

import numpy as np

from .errors import NumericalDifferentiationFailure

EPS = np.finfo(float).eps

# step exponents: eps**(1/3) for first derivatives of smooth data,
# eps**(1/5) when the differentiated data is itself a difference quotient
FIRST_ORDER = 1.0 / 3.0
NESTED = 1.0 / 5.0


def step_sizes(x: np.ndarray, exponent: float = FIRST_ORDER, offset: bool = False) -> np.ndarray:
    """
    Per-coordinate difference steps.

    Args:
        x (np.ndarray): Evaluation point
        exponent (float): Power of machine epsilon
        offset (bool): Use ``1 + |x|`` scaling instead of ``max(1, |x|)``

    Returns:
        np.ndarray: Step for each coordinate
    """
    ax = np.abs(np.asarray(x, dtype=float))
    scale = 1.0 + ax if offset else np.maximum(1.0, ax)
    h = EPS ** exponent * scale
    # representable step
    h = (x + h) - x
    if np.any(h <= 0.0) or not np.all(np.isfinite(h)):
        raise NumericalDifferentiationFailure(f"difference step underflow at {x}")
    return h


def jacobian(
    f: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    exponent: float = FIRST_ORDER,
    offset: bool = False,
) -> np.ndarray:
    """
    Derivative of an array-valued function of a point.

    Args:
        f (Callable): Map from a 1-D point to an array of any shape
        x (np.ndarray): Evaluation point
        exponent (float): Step exponent (see ``step_sizes``)
        offset (bool): Step scaling mode

    Returns:
        np.ndarray: Array of shape ``f(x).shape + (len(x),)``
    """
    x = np.asarray(x, dtype=float)
    h = step_sizes(x, exponent, offset)
    columns = []
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h[k]
        d = (
            np.asarray(f(x - 2 * e)) - 8.0 * np.asarray(f(x - e))
            + 8.0 * np.asarray(f(x + e)) - np.asarray(f(x + 2 * e))
        ) / (12.0 * h[k])
        columns.append(d)
    result = np.stack(columns, axis=-1)
    if not np.all(np.isfinite(result)):
        raise NumericalDifferentiationFailure(f"non-finite derivative at {x}")
    return result


def gradient(
    f: Callable[[np.ndarray], float],
    x: np.ndarray,
    exponent: float = FIRST_ORDER,
    offset: bool = False,
) -> np.ndarray:
    """Gradient of a scalar function; thin wrapper over ``jacobian``."""
    return jacobian(lambda y: np.asarray(f(y), dtype=float), x, exponent, offset)


def time_derivative(f: Callable[[float], np.ndarray], t: float = 0.0, h: float = 1e-4) -> np.ndarray:
    """Derivative of a curve ``f(t)`` at ``t`` with the same stencil."""
    return (
        np.asarray(f(t - 2 * h)) - 8.0 * np.asarray(f(t - h))
        + 8.0 * np.asarray(f(t + h)) - np.asarray(f(t + 2 * h))
    ) / (12.0 * h)
