"""
Central finite differences used wherever an analytic derivative is missing.
"""

from typing import Callable

import numpy as np

from .config import STEP_ABS, STEP_REL


def step_sizes(theta: np.ndarray) -> np.ndarray:
    """Per-coordinate step h = max(1e-5, 1e-5*|theta|)."""
    theta = np.asarray(theta, dtype=float)
    return np.maximum(STEP_ABS, STEP_REL * np.abs(theta))


def central_diff(f: Callable[[np.ndarray], np.ndarray], theta: np.ndarray,
                 steps: np.ndarray = None) -> np.ndarray:
    """
    Derivative of an array-valued function of theta.

    Args:
        f: Maps theta (d,) to an array of any shape S
        theta: Evaluation point
        steps: Optional per-coordinate steps

    Returns:
        Array of shape S + (d,); the last axis indexes the theta coordinate
    """
    theta = np.asarray(theta, dtype=float)
    h = step_sizes(theta) if steps is None else np.asarray(steps, dtype=float)
    columns = []
    for r in range(theta.size):
        e = np.zeros_like(theta)
        e[r] = h[r]
        columns.append((np.asarray(f(theta + e)) - np.asarray(f(theta - e))) / (2.0 * h[r]))
    return np.stack(columns, axis=-1)


def hessian(f: Callable[[np.ndarray], float], theta: np.ndarray) -> np.ndarray:
    """Symmetrized central-difference Hessian of a scalar function."""
    theta = np.asarray(theta, dtype=float)
    h = step_sizes(theta) * 10.0
    d = theta.size
    out = np.empty((d, d))
    f0 = float(f(theta))
    for r in range(d):
        er = np.zeros(d)
        er[r] = h[r]
        out[r, r] = (f(theta + er) - 2.0 * f0 + f(theta - er)) / h[r] ** 2
        for s in range(r + 1, d):
            es = np.zeros(d)
            es[s] = h[s]
            val = (f(theta + er + es) - f(theta + er - es)
                   - f(theta - er + es) + f(theta - er - es)) / (4.0 * h[r] * h[s])
            out[r, s] = out[s, r] = val
    return out
