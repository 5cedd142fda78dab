"""
Quadrature posterior for a scalar parameter.

Used where Monte Carlo error would swamp the quantity under study
(variance ordering across gamma, validity of the posterior CDF).
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from crel.core.exceptions import CrelException, DegenerateError, DomainError, SchemaError
from crel.estimating.functions import EstimatingFunction
from crel.estimating.solver import solve_m_estimate
from crel.expansion.tensors import compute_tensors
from crel.model_data.datasets import Dataset
from crel.model_data.models import ParametricModel, Prior
from .sampler import GELTarget, starting_point

logger = logging.getLogger(__name__)

DEFAULT_GRID_POINTS = 401
DEFAULT_GRID_HALF_WIDTH = 8.0


@dataclass(frozen=True, eq=False)
class GridPosterior:
    grid: np.ndarray
    log_density: np.ndarray
    density: np.ndarray
    cdf_values: np.ndarray
    failures: int = 0

    def cdf(self, t: float) -> float:
        return float(np.interp(t, self.grid, self.cdf_values, left=0.0, right=1.0))

    def quantile(self, alpha: float) -> float:
        """Linear inverse of the cumulative trapezoid CDF."""
        if not 0.0 < alpha < 1.0:
            raise DomainError("alpha must lie in (0, 1)", {"alpha": alpha})
        F = self.cdf_values
        i = int(np.searchsorted(F, alpha, side="left"))
        i = min(max(i, 1), F.size - 1)
        lo, hi = F[i - 1], F[i]
        frac = 0.0 if hi <= lo else (alpha - lo) / (hi - lo)
        return float(self.grid[i - 1] + frac * (self.grid[i] - self.grid[i - 1]))

    def mean(self) -> float:
        return float(trapezoid(self.grid * self.density, self.grid))


def _normalize(grid: np.ndarray, log_density: np.ndarray, failures: int = 0) -> GridPosterior:
    finite = np.isfinite(log_density)
    if not np.any(finite):
        raise DegenerateError("posterior has no mass on the grid",
                              {"lo": float(grid[0]), "hi": float(grid[-1])})
    unnorm = np.where(finite, np.exp(log_density - np.max(log_density[finite])), 0.0)
    mass = trapezoid(unnorm, grid)
    if not mass > 0.0:
        raise DegenerateError("posterior has no mass on the grid")
    density = unnorm / mass
    cdf = cumulative_trapezoid(density, grid, initial=0.0)
    cdf = np.clip(cdf / cdf[-1], 0.0, 1.0)
    return GridPosterior(grid=grid, log_density=log_density, density=density,
                         cdf_values=cdf, failures=failures)


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size < 3 or np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be increasing with at least 3 points")
    return grid


def grid_posterior(data: Dataset, psi: EstimatingFunction, prior: Prior, gamma: float,
                   grid=None, points: int = DEFAULT_GRID_POINTS) -> GridPosterior:
    """
    Normalized GEL posterior on a grid of scalar theta values.

    Args:
        data: Dataset
        psi: Scalar-parameter estimating function
        prior: Prior
        gamma: Cressie-Read index
        grid: Increasing grid; default theta_hat +/- 8 sqrt(nu/n)
        points: Size of the default grid

    Returns:
        GridPosterior

    Raises:
        SchemaError: If psi has more than one parameter
        DegenerateError: If no grid point has positive density
    """
    psi = psi.bind(data)
    if psi.dim_theta != 1:
        raise SchemaError("grid posteriors need a scalar parameter")
    if grid is None:
        theta_hat = solve_m_estimate(psi, data, starting_point(data, psi, prior)).theta_hat
        try:
            half = DEFAULT_GRID_HALF_WIDTH * np.sqrt(compute_tensors(data, psi, theta_hat).nu_inv[0, 0] / data.n)
        except CrelException:
            half = DEFAULT_GRID_HALF_WIDTH * data.univariate().std(ddof=1) / np.sqrt(data.n)
        grid = np.linspace(theta_hat[0] - half, theta_hat[0] + half, points)
    grid = _check_grid(grid)
    target = GELTarget(data, psi, prior, gamma)
    log_density = np.array([target(np.array([t])) for t in grid])
    if target.failures:
        logger.debug(f"grid posterior: {target.failures} inner solves failed")
    return _normalize(grid, log_density, target.failures)


def parametric_grid_posterior(model: ParametricModel, data: Dataset, prior: Prior,
                              grid=None, points: int = DEFAULT_GRID_POINTS) -> GridPosterior:
    """Normalized parametric posterior on a grid; default theta_ml +/- 8 sqrt(1/(n L))."""
    if model.dim != 1:
        raise SchemaError("grid posteriors need a scalar parameter")
    if grid is None:
        theta_ml = float(np.ravel(model.fit_ml(data))[0])
        info = float(np.ravel(model.info2(data, theta_ml))[0])
        half = DEFAULT_GRID_HALF_WIDTH / np.sqrt(data.n * max(info, 1e-12))
        grid = np.linspace(theta_ml - half, theta_ml + half, points)
    grid = _check_grid(grid)

    def log_post(t: float) -> float:
        try:
            return model.log_likelihood(data, t) + prior.xi(np.array([t]))
        except DomainError:
            return -np.inf

    return _normalize(grid, np.array([log_post(t) for t in grid]))
