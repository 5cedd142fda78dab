"""
Estimating functions by name, for config files, flags and HTTP requests.
"""

from typing import Optional

from crel.core.exceptions import DomainError
from crel.model_data.models import LaplaceModel, ExponentialMeanModel, NormalModel
from .functions import EstimatingFunction, psi_huber, psi_mean, psi_median, psi_score, psi_tukey
from .glm import psi_glm, psi_glm_robust

SCORE_MODELS = {"laplace": LaplaceModel, "normal": NormalModel, "exponential": ExponentialMeanModel}


def psi_from_name(name: str, tuning: Optional[float] = None) -> EstimatingFunction:
    """
    Resolve ``mean``, ``median``, ``huber[:c]``, ``tukey[:k]``, ``glm``,
    ``glm_robust[:c]`` or ``score:<model>``.

    Args:
        name: Family name, optionally with ``:constant``
        tuning: Tuning constant overriding the one in ``name``

    Returns:
        EstimatingFunction

    Raises:
        DomainError: If the name is unknown
    """
    base, _, arg = name.strip().lower().partition(":")
    if base == "score":
        if arg not in SCORE_MODELS:
            raise DomainError(f"Unknown model for score: {arg}", {"known": sorted(SCORE_MODELS)})
        return psi_score(SCORE_MODELS[arg]())
    constant = tuning
    if constant is None and arg:
        try:
            constant = float(arg)
        except ValueError:
            raise DomainError(f"Bad tuning constant in {name}")
    if base == "mean":
        return psi_mean()
    if base == "median":
        return psi_median()
    if base == "huber":
        return psi_huber(1.345 if constant is None else constant)
    if base in ("tukey", "biweight"):
        return psi_tukey(4.685 if constant is None else constant)
    if base == "glm":
        return psi_glm("log", "poisson")
    if base == "glm_robust":
        return psi_glm_robust(1.6 if constant is None else constant, "log", "poisson")
    raise DomainError(f"Unknown estimating function: {name}",
                      {"known": ["mean", "median", "huber", "tukey", "glm", "glm_robust", "score:<model>"]})
