"""
M-estimator root finding and the unbiasedness diagnostic.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from crel.core.config import MEST_MAX_ITER, MEST_TOL
from crel.core.exceptions import ConvergenceError, DomainError
from crel.core.streams import derive_rng
from crel.model_data.datasets import Dataset
from .functions import EstimatingFunction

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MEstimate:
    theta_hat: np.ndarray
    residual_norm: float
    iterations: int


def _residual(psi: EstimatingFunction, data: Dataset, theta: np.ndarray) -> np.ndarray:
    return psi.evaluate(data, theta).sum(axis=0)


def solve_m_estimate(psi: EstimatingFunction, data: Dataset, theta0) -> MEstimate:
    """
    Root of sum_i psi(x_i, theta) = 0.

    Closed-form roots (mean, median, ML fits) are used when the estimating
    function carries one; otherwise damped Newton from ``theta0`` with step
    halving on the residual norm.

    Args:
        psi: Estimating function
        data: Dataset
        theta0: Finite starting point

    Returns:
        MEstimate with the root, the sup-norm of the summed psi and iterations

    Raises:
        ConvergenceError: If 200 damped Newton steps do not reach tolerance
    """
    psi = psi.bind(data)
    theta = np.atleast_1d(np.asarray(theta0, dtype=float)).copy()
    if theta.size != psi.dim_theta or not np.all(np.isfinite(theta)):
        raise DomainError("theta0 must be a finite vector of the right length",
                          {"expected": psi.dim_theta, "theta0": theta.tolist()})

    if psi.root is not None:
        theta_hat = np.atleast_1d(np.asarray(psi.root(data), dtype=float))
        res = float(np.max(np.abs(_residual(psi, data, theta_hat))))
        return MEstimate(theta_hat=theta_hat, residual_norm=res, iterations=0)

    tol = MEST_TOL * data.n
    S = _residual(psi, data, theta)
    norm = float(np.max(np.abs(S)))
    for it in range(1, MEST_MAX_ITER + 1):
        if norm <= tol:
            return MEstimate(theta_hat=theta, residual_norm=norm, iterations=it - 1)
        J = psi.jacobian(data, theta).sum(axis=0)
        try:
            step = np.linalg.solve(J, -S)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, -S, rcond=None)[0]
        t = 1.0
        while True:
            candidate = theta + t * step
            S_new = _residual(psi, data, candidate)
            norm_new = float(np.max(np.abs(S_new)))
            if np.isfinite(norm_new) and norm_new < norm:
                break
            t *= 0.5
            if t < 1e-10:
                break
        if not np.isfinite(norm_new) or norm_new >= norm:
            logger.debug(f"{psi.label}: line search stalled at residual {norm:.3e}")
            if np.max(np.abs(t * step)) < 1e-14 * (1.0 + np.max(np.abs(theta))):
                break
        else:
            theta, S, norm = candidate, S_new, norm_new
    if norm <= tol:
        return MEstimate(theta_hat=theta, residual_norm=norm, iterations=MEST_MAX_ITER)
    raise ConvergenceError(
        f"M-estimation with {psi.label} did not converge",
        {"residual": norm, "iterations": MEST_MAX_ITER, "theta": theta.tolist()},
    )


def unbiasedness_check(
    psi: EstimatingFunction,
    draw: Callable[[int, np.random.Generator], Dataset],
    theta,
    draws: int = 100_000,
    seed: int = 0,
) -> Tuple[np.ndarray, np.ndarray, bool]:
    """
    Monte Carlo check that E_F[psi(x, theta)] = 0 at the generating model.

    Args:
        psi: Estimating function
        draw: Callable returning a Dataset of the requested size from a Generator
        theta: True parameter
        draws: Number of observations
        seed: Master seed

    Returns:
        (mean, sd, ok) with ok when every |mean| <= 3 sd / sqrt(draws)
    """
    data = draw(draws, derive_rng(seed))
    values = psi.bind(data).evaluate(data, theta)
    mean = values.mean(axis=0)
    sd = values.std(axis=0, ddof=1)
    ok = bool(np.all(np.abs(mean) <= 3.0 * sd / np.sqrt(values.shape[0])))
    if not ok:
        logger.warning(f"{psi.label}: estimating function looks biased, mean={mean.tolist()}")
    return mean, sd, ok
