"""
GEL posterior and the random-walk Metropolis sampler.

The log posterior is -l_gamma(theta)/2 + xi(theta). Proposals are Gaussian
with per-component scales; during burn-in a common log-scale multiplier is
adapted towards acceptance 0.3 and is frozen afterwards, so the retained
draws come from a fixed Metropolis kernel.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from crel.core.audit import RunLogger
from crel.core.config import MAX_BURN_IN_FAILURE_SHARE, TARGET_ACCEPTANCE
from crel.core.exceptions import (
    ConvergenceError,
    CrelException,
    DomainError,
    SamplerError,
)
from crel.core.models import PosteriorConfig
from crel.core.streams import derive_rng
from crel.estimating.functions import EstimatingFunction
from crel.estimating.solver import solve_m_estimate
from crel.expansion.tensors import compute_tensors
from crel.likelihood.ratio import gelr_from_matrix
from crel.model_data.datasets import Dataset
from crel.model_data.models import ParametricModel, Prior
from .summaries import effective_sample_size

logger = logging.getLogger(__name__)

# stream tag for the proposal/uniform draws of one chain
_CHAIN_STREAM = 7


@dataclass(frozen=True, eq=False)
class PosteriorSample:
    draws: np.ndarray
    acceptance_rate: float
    ess: np.ndarray
    log_post_trace: np.ndarray
    iterations: np.ndarray
    failures: int = 0
    proposal_scale: Optional[np.ndarray] = None


class GELTarget:
    """
    Log posterior of one dataset, counting inner-solve failures.

    Hull failures and non-converged inner solves both evaluate to -inf.
    """

    def __init__(self, data: Dataset, psi: EstimatingFunction, prior: Prior, gamma: float):
        self.data = data
        self.psi = psi.bind(data)
        self.prior = prior
        self.gamma = float(gamma)
        self.failures = 0

    def __call__(self, theta) -> float:
        try:
            value = gelr_from_matrix(self.psi.evaluate(self.data, theta), self.gamma)
        except ConvergenceError as e:
            self.failures += 1
            if self.failures == 1:
                RunLogger.log_solver_failure("log_posterior", self.gamma, e.message, e.details)
            logger.debug(f"inner solve failed at theta={np.ravel(theta).tolist()}: {e.message}")
            return -np.inf
        if not value.hull_ok:
            return -np.inf
        return -0.5 * value.value + self.prior.xi(theta)


def log_posterior(data: Dataset, psi: EstimatingFunction, prior: Prior, theta,
                  gamma: float) -> float:
    """
    Unnormalized GEL log posterior at theta.

    Args:
        data: Dataset
        psi: Estimating function
        prior: Prior
        theta: Parameter value
        gamma: Cressie-Read index

    Returns:
        -l_gamma(theta)/2 + xi(theta), or -inf outside the hull or when the
        inner solve does not converge
    """
    target = GELTarget(data, psi, prior, gamma)
    value = target(theta)
    if target.failures:
        logger.warning(f"log_posterior: inner solve failed at theta={np.ravel(theta).tolist()}")
    return value


def metropolis(log_target: Callable[[np.ndarray], float], theta0, scale,
               config: PosteriorConfig, failures: Callable[[], int] = lambda: 0) -> PosteriorSample:
    """
    Adaptive-then-frozen random-walk Metropolis.

    All normals and uniforms are drawn up front from the chain's own stream,
    so the draws depend only on ``config.seed``.

    Args:
        log_target: Unnormalized log density
        theta0: Starting point, must have a finite log density
        scale: Per-component proposal standard deviations
        config: Chain length, burn-in, thinning, adaptation and seed
        failures: Callable returning the running count of failed evaluations

    Returns:
        PosteriorSample of the retained draws

    Raises:
        SamplerError: If the start is infeasible or more than half of the
            burn-in evaluations fail
    """
    current = np.atleast_1d(np.asarray(theta0, dtype=float)).copy()
    scale = np.broadcast_to(np.asarray(scale, dtype=float), current.shape).copy()
    if np.any(scale <= 0) or not np.all(np.isfinite(scale)):
        raise DomainError("proposal scale must be positive", {"scale": scale.tolist()})
    lp = log_target(current)
    if not np.isfinite(lp):
        raise SamplerError("Starting point has zero posterior density",
                           {"theta0": current.tolist()})

    d = current.size
    total, burn_in = config.chain_length, config.burn_in
    rng = derive_rng(config.seed, _CHAIN_STREAM)
    normals = rng.standard_normal((total, d))
    log_u = np.log1p(-rng.random(total))

    log_mult = 0.0
    kept_draws, kept_lp, kept_it = [], [], []
    accepted = 0
    retained_steps = 0
    for i in range(total):
        proposal = current + np.exp(log_mult) * scale * normals[i]
        lp_prop = log_target(proposal)
        accept = bool(np.isfinite(lp_prop) and log_u[i] < lp_prop - lp)
        if accept:
            current, lp = proposal, lp_prop
        if i < burn_in:
            if config.adapt:
                log_mult += (float(accept) - TARGET_ACCEPTANCE) / (i + 1) ** 0.6
            if i == burn_in - 1:
                failed = failures()
                if failed > MAX_BURN_IN_FAILURE_SHARE * burn_in:
                    raise SamplerError(
                        "Inner solve failed on more than half of the burn-in steps",
                        {"failures": failed, "burn_in": burn_in},
                    )
            continue
        retained_steps += 1
        accepted += accept
        if (i - burn_in) % config.thin == 0:
            kept_draws.append(current.copy())
            kept_lp.append(lp)
            kept_it.append(i)

    draws = np.asarray(kept_draws)
    rate = accepted / max(retained_steps, 1)
    if rate == 0.0:
        logger.warning("no proposal was accepted after burn-in")
    final_scale = np.exp(log_mult) * scale
    logger.debug(f"chain done: acceptance={rate:.3f}, scale={final_scale.tolist()}")
    return PosteriorSample(
        draws=draws,
        acceptance_rate=float(rate),
        ess=effective_sample_size(draws),
        log_post_trace=np.asarray(kept_lp),
        iterations=np.asarray(kept_it, dtype=int),
        failures=int(failures()),
        proposal_scale=final_scale,
    )


def starting_point(data: Dataset, psi: EstimatingFunction, prior: Prior) -> np.ndarray:
    if psi.dim_theta == 1 and not data.is_glm and data.p == 1:
        return np.array([np.median(data.univariate())])
    mode = np.asarray(prior.mode, dtype=float)
    return mode if mode.size == psi.dim_theta else np.zeros(psi.dim_theta)


def default_proposal_scale(data: Dataset, psi: EstimatingFunction, theta_hat) -> np.ndarray:
    """2.4 sqrt(nu^jj / n), falling back to the spread of psi when K is singular."""
    n = data.n
    try:
        tensors = compute_tensors(data, psi, theta_hat)
        return 2.4 * np.sqrt(np.diag(tensors.nu_inv) / n)
    except CrelException as e:
        logger.warning(f"default proposal scale fell back to psi spread: {e.message}")
    P = psi.evaluate(data, theta_hat)
    spread = P.std(axis=0, ddof=1)
    spread[~(spread > 0)] = 1.0
    return 2.4 * spread / np.sqrt(n)


def sample_posterior(data: Dataset, psi: EstimatingFunction, prior: Prior,
                     config: PosteriorConfig, gamma: float, theta0=None) -> PosteriorSample:
    """
    Metropolis sample from the GEL posterior, started at the M-estimate.

    Args:
        data: Dataset
        psi: Estimating function
        prior: Prior
        config: Sampler settings
        gamma: Cressie-Read index
        theta0: Starting value for the M-estimation (default: sample median
            for scalar location, else the prior mode)

    Returns:
        PosteriorSample

    Raises:
        SamplerError: If more than half of the burn-in inner solves fail
        ConvergenceError: If the M-estimate cannot be found
    """
    psi = psi.bind(data)
    start = starting_point(data, psi, prior) if theta0 is None else theta0
    theta_hat = solve_m_estimate(psi, data, start).theta_hat
    if config.proposal_scale is not None:
        scale = np.asarray(config.proposal_scale, dtype=float)
    else:
        scale = default_proposal_scale(data, psi, theta_hat)
    target = GELTarget(data, psi, prior, gamma)
    return metropolis(target, theta_hat, scale, config, failures=lambda: target.failures)


def sample_parametric_posterior(model: ParametricModel, data: Dataset, prior: Prior,
                                config: PosteriorConfig) -> PosteriorSample:
    """
    Metropolis sample from the parametric posterior log L(theta) + xi(theta).

    Started at the ML estimate with proposal scale 2.4 sqrt(diag(L^-1) / n).
    """
    theta_ml = np.atleast_1d(model.fit_ml(data))

    def target(theta):
        try:
            value = model.log_likelihood(data, theta) + prior.xi(theta)
        except DomainError:
            return -np.inf
        return value if np.isfinite(value) else -np.inf

    if config.proposal_scale is not None:
        scale = np.asarray(config.proposal_scale, dtype=float)
    else:
        info = np.atleast_2d(model.info2(data, theta_ml))
        scale = 2.4 * np.sqrt(np.diag(np.linalg.inv(info)) / data.n)
    return metropolis(target, theta_ml, scale, config)
