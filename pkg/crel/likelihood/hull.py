"""
Convex hull condition: is 0 interior to the hull of the psi rows?
"""

import logging

import numpy as np
from scipy.optimize import linprog

logger = logging.getLogger(__name__)


def convex_hull_check(psi_matrix) -> bool:
    """
    True iff 0 lies in the interior of the convex hull of the rows.

    d = 1 checks for a sign change. For d > 1 the rows must span R^d and a
    linear program must find weights w_i >= t > 0 with sum w = 1 and
    sum w_i psi_i = 0. All-zero rows count as feasible.
    """
    P = np.asarray(psi_matrix, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    if not np.all(np.isfinite(P)):
        return False
    scale = np.max(np.abs(P)) if P.size else 0.0
    if scale == 0.0:
        return True
    n, d = P.shape
    if d == 1:
        return bool(np.any(P[:, 0] > 0) and np.any(P[:, 0] < 0))
    if n < d + 1 or np.linalg.matrix_rank(P / scale) < d:
        return False

    # variables (w_1..w_n, t); maximize t subject to w_i - t >= 0
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-np.eye(n), np.ones((n, 1))])
    b_ub = np.zeros(n)
    A_eq = np.vstack([
        np.append(np.ones(n), 0.0),
        np.hstack([(P / scale).T, np.zeros((d, 1))]),
    ])
    b_eq = np.append(1.0, np.zeros(d))
    bounds = [(0.0, None)] * n + [(0.0, 1.0)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if not res.success:
        logger.debug(f"hull LP status {res.status}: {res.message}")
        return False
    return bool(-res.fun > 1e-10)
