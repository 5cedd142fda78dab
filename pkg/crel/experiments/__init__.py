"""Analytic bias formulas and repeated-sampling studies."""

from .efficiency import (
    asymptotic_efficiency_inv,
    bias_coverage,
    bias_quantile,
    bias_table,
    r_term,
    rstar_term,
    theorem4_statistic,
    TABLE2_ALPHAS,
)
from .runner import Outcome, run_replications
from .coverage import coverage_simulation, validity_study, wilks_calibration, reduce_cells
from .glm_study import glm_accuracy_simulation
from .variance_study import theorem5_variance_study, theorem4_cancellation, expansion_order_study
from .tables import to_frame, render_text, write_table, failed_share
from .studies import TABLES, SCALES, run_study, reproduce_table

__all__ = [
    "asymptotic_efficiency_inv", "bias_coverage", "bias_quantile", "bias_table", "r_term",
    "rstar_term", "theorem4_statistic", "TABLE2_ALPHAS", "Outcome", "run_replications",
    "coverage_simulation", "validity_study", "wilks_calibration", "reduce_cells",
    "glm_accuracy_simulation", "theorem5_variance_study", "theorem4_cancellation",
    "expansion_order_study", "to_frame", "render_text", "write_table", "failed_share",
    "TABLES", "SCALES", "run_study", "reproduce_table",
]
