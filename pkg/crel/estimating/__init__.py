"""M-estimating functions and M-estimation."""

from .functions import (
    EstimatingFunction,
    psi_mean,
    psi_median,
    psi_huber,
    psi_tukey,
    psi_score,
)
from .glm import psi_glm, psi_glm_robust, poisson_expected_huber
from .solver import MEstimate, solve_m_estimate, unbiasedness_check
from .registry import psi_from_name

__all__ = [
    "EstimatingFunction", "psi_mean", "psi_median", "psi_huber", "psi_tukey", "psi_score",
    "psi_glm", "psi_glm_robust", "poisson_expected_huber",
    "MEstimate", "solve_m_estimate", "unbiasedness_check", "psi_from_name",
]
