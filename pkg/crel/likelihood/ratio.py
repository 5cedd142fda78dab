"""
Generalized empirical likelihood ratio statistic and profile curves.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from crel.core.exceptions import ConvergenceError, SchemaError
from crel.estimating.functions import EstimatingFunction
from crel.model_data.datasets import Dataset, ecdf
from crel.model_data.models import ParametricModel
from .dual import solve_lambda, weights_from_lambda
from .hull import convex_hull_check

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GELRValue:
    value: float
    hull_ok: bool


INFEASIBLE = GELRValue(value=float("inf"), hull_ok=False)


def gelr_from_matrix(psi_matrix, gamma: float) -> GELRValue:
    """-2 sum log(n w_i) for the gamma-branch weights of a psi matrix."""
    P = np.asarray(psi_matrix, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    d = P.shape[1]
    # d > 1: skip the LP unless the solve fails
    if d == 1 and not convex_hull_check(P):
        return INFEASIBLE
    try:
        solution = solve_lambda(P, gamma, check_hull=False)
    except ConvergenceError:
        if d > 1 and not convex_hull_check(P):
            return INFEASIBLE
        raise
    w = weights_from_lambda(P, solution).weights
    n = P.shape[0]
    if np.any(w <= 0):
        return INFEASIBLE
    value = float(-2.0 * np.sum(np.log(n * w)))
    return GELRValue(value=max(value, 0.0) if value > -1e-10 else value, hull_ok=True)


def gelr(data: Dataset, psi: EstimatingFunction, theta, gamma: float) -> GELRValue:
    """
    GELR statistic at theta.

    Args:
        data: Dataset
        psi: Estimating function
        theta: Parameter value
        gamma: Cressie-Read index

    Returns:
        GELRValue; +inf with hull_ok=False when 0 is outside the hull

    Raises:
        ConvergenceError: If the inner solve fails inside the hull
    """
    psi = psi.bind(data)
    return gelr_from_matrix(psi.evaluate(data, theta), gamma)


def gelr_median_closed_form(data: Dataset, theta: float) -> GELRValue:
    """
    Two-group closed form for the median score:
    -2 log[(0.5/F)^(nF) (0.5/(1-F))^(n(1-F))], F = F_n(theta).
    """
    x = data.univariate()
    n = x.size
    F = ecdf(data, float(np.ravel(theta)[0]))
    if F <= 0.0 or F >= 1.0:
        return INFEASIBLE
    k = n * F
    value = -2.0 * (k * np.log(0.5 / F) + (n - k) * np.log(0.5 / (1.0 - F)))
    return GELRValue(value=float(value), hull_ok=True)


@dataclass(frozen=True)
class ProfileCurve:
    theta: np.ndarray
    gelr: np.ndarray
    parametric: Optional[np.ndarray] = None

    def rows(self):
        for i, t in enumerate(self.theta):
            yield (float(t), float(self.gelr[i]),
                   None if self.parametric is None else float(self.parametric[i]))


def profile_curve(data: Dataset, psi: EstimatingFunction, grid, gamma: float,
                  model: Optional[ParametricModel] = None) -> ProfileCurve:
    """
    GELR values over a scalar grid, with an optional parametric overlay.

    Infeasible grid points carry the +inf sentinel; inner solves that fail
    inside the hull are reported as nan and logged.
    """
    psi = psi.bind(data)
    if psi.dim_theta != 1:
        raise SchemaError("profile curves need a scalar parameter")
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    values = np.empty(grid.size)
    for i, t in enumerate(grid):
        try:
            values[i] = gelr(data, psi, t, gamma).value
        except ConvergenceError as e:
            logger.warning(f"profile point theta={t:g} failed: {e.message}")
            values[i] = np.nan
    overlay = None
    if model is not None:
        theta_ml = model.fit_ml(data)
        ll_ml = model.log_likelihood(data, theta_ml)
        overlay = np.array([2.0 * (ll_ml - model.log_likelihood(data, t)) for t in grid])
    return ProfileCurve(theta=grid, gelr=values, parametric=overlay)


def check_conditions(data: Dataset, psi: EstimatingFunction, theta) -> Dict[str, bool]:
    """
    Runtime diagnostics for the regularity conditions at theta.

    Keys: hull (0 inside the hull), sample_size (n > d), omega_pd (second
    moment matrix positive definite), v_full_rank (derivative matrix of rank
    d; skipped for non-smooth psi), moments_finite (third and fourth sample
    moments finite).
    """
    psi = psi.bind(data)
    P = psi.evaluate(data, theta)
    n, d = P.shape
    omega = P.T @ P / n
    report = {
        "hull": convex_hull_check(P),
        "sample_size": n > d,
        "omega_pd": bool(np.all(np.linalg.eigvalsh(0.5 * (omega + omega.T)) > 1e-12)),
        "moments_finite": bool(np.isfinite(np.sum(np.abs(P) ** 4))),
    }
    if psi.smooth:
        V = -psi.jacobian(data, theta).mean(axis=0)
        report["v_full_rank"] = bool(np.linalg.matrix_rank(V) == d)
    failed = [k for k, ok in report.items() if not ok]
    if failed:
        logger.warning(f"{psi.label}: regularity conditions violated: {', '.join(failed)}")
    return report
