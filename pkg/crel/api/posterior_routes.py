"""
Posterior sampling endpoint.
"""

import logging

from fastapi import APIRouter

from crel.core.models import PosteriorRequest, PosteriorResponse
from crel.model_data.models import parse_prior
from crel.posterior.sampler import sample_posterior
from crel.posterior.summaries import posterior_quantile
from .common import resolve

logger = logging.getLogger(__name__)

router = APIRouter(tags=["posterior"])


@router.post("/posterior", response_model=PosteriorResponse)
def posterior_endpoint(request: PosteriorRequest):
    """
    Metropolis sample of the GEL posterior summarized by quantiles.

    Args:
        request: Data rows, psi, gamma, prior spec, levels and sampler settings
    """
    data, psi = resolve(request.data, request.psi)
    prior = parse_prior(request.prior, psi.dim_theta)
    sample = sample_posterior(data, psi, prior, request.sampler, request.gamma)
    quantiles = [posterior_quantile(sample, request.component, a) for a in request.alpha]
    logger.info(f"posterior: {psi.label}, gamma={request.gamma}, "
                f"acceptance={sample.acceptance_rate:.3f}")
    return PosteriorResponse(
        quantiles=quantiles,
        acceptance_rate=sample.acceptance_rate,
        ess=sample.ess.tolist(),
        failures=sample.failures,
    )
