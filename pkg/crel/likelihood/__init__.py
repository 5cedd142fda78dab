"""Cressie-Read inner problem, GELR statistic and profile curves."""

from .hull import convex_hull_check
from .dual import LambdaSolution, CRWeights, solve_lambda, weights_from_lambda, solve_weights, branch_of
from .ratio import (
    GELRValue,
    gelr,
    gelr_from_matrix,
    gelr_median_closed_form,
    ProfileCurve,
    profile_curve,
    check_conditions,
)

__all__ = [
    "convex_hull_check", "LambdaSolution", "CRWeights", "solve_lambda", "weights_from_lambda",
    "solve_weights", "branch_of", "GELRValue", "gelr", "gelr_from_matrix",
    "gelr_median_closed_form", "ProfileCurve", "profile_curve", "check_conditions",
]
