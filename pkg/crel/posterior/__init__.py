"""GEL posterior: log density, Metropolis sampling, quadrature and summaries."""

from .sampler import (
    PosteriorSample,
    GELTarget,
    log_posterior,
    metropolis,
    default_proposal_scale,
    sample_posterior,
    sample_parametric_posterior,
)
from .summaries import (
    batch_means_se,
    effective_sample_size,
    posterior_quantile,
    posterior_cdf_at,
    write_chain_csv,
    summary_text,
)
from .grid import GridPosterior, grid_posterior, parametric_grid_posterior

__all__ = [
    "PosteriorSample", "GELTarget", "log_posterior", "metropolis", "default_proposal_scale",
    "sample_posterior", "sample_parametric_posterior", "batch_means_se",
    "effective_sample_size", "posterior_quantile", "posterior_cdf_at", "write_chain_csv",
    "summary_text", "GridPosterior", "grid_posterior", "parametric_grid_posterior",
]
