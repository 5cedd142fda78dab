"""
Posterior summaries: batch-means errors, quantiles, CDF values and chain dumps.
"""

import logging
from pathlib import Path
from typing import Iterable, Tuple, Union

import numpy as np
import pandas as pd
from scipy.stats import gaussian_kde

from crel.core.config import MIN_ESS
from crel.core.exceptions import DegenerateError, DomainError
from crel.core.models import QuantileEstimate

logger = logging.getLogger(__name__)


def _batches(x: np.ndarray) -> Tuple[np.ndarray, int]:
    m = x.size
    b = max(1, int(np.floor(np.sqrt(m))))
    k = m // b
    return x[: k * b].reshape(k, b).mean(axis=1), b


def batch_means_se(x) -> float:
    """Batch-means standard error of the mean of a chain, batch size floor(sqrt(m))."""
    x = np.asarray(x, dtype=float).ravel()
    m = x.size
    if m < 4:
        return float(x.std(ddof=1) / np.sqrt(m)) if m > 1 else 0.0
    means, b = _batches(x)
    var_bm = b * means.var(ddof=1)
    return float(np.sqrt(var_bm / m))


def effective_sample_size(draws) -> np.ndarray:
    """m var(x) / (b var(batch means)) per column; 0 for a constant column."""
    draws = np.asarray(draws, dtype=float)
    if draws.ndim == 1:
        draws = draws[:, None]
    m = draws.shape[0]
    ess = np.zeros(draws.shape[1])
    for j in range(draws.shape[1]):
        x = draws[:, j]
        var = x.var(ddof=1) if m > 1 else 0.0
        if var <= 0.0:
            continue
        if m < 4:
            ess[j] = m
            continue
        means, b = _batches(x)
        var_bm = b * means.var(ddof=1)
        ess[j] = m if var_bm <= 0.0 else min(m * var / var_bm, float(m))
    return ess


def _component(sample, component: int) -> np.ndarray:
    draws = np.asarray(sample.draws)
    if not 0 <= component < draws.shape[1]:
        raise DomainError("component index out of range",
                          {"component": component, "d": int(draws.shape[1])})
    return draws[:, component]


def posterior_quantile(sample, component: int, alpha: float) -> QuantileEstimate:
    """
    alpha-quantile of one component of a posterior sample.

    The value interpolates linearly between adjacent order statistics. Its
    Monte Carlo error is the batch-means error of the indicator 1{x <= q}
    (never below the iid value) divided by a kernel density estimate at q.

    Args:
        sample: PosteriorSample
        component: Zero-based parameter index
        alpha: Level in (0, 1)

    Returns:
        QuantileEstimate

    Raises:
        DomainError: If alpha is outside (0, 1)
        DegenerateError: If every retained draw is identical
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)", {"alpha": alpha})
    x = _component(sample, component)
    if np.ptp(x) == 0.0:
        raise DegenerateError(details={"component": component, "value": float(x[0])})
    ess = np.asarray(sample.ess)
    if ess[component] < MIN_ESS:
        logger.warning(f"component {component}: effective sample size {ess[component]:.0f} "
                       f"is below {MIN_ESS}")
    m = x.size
    value = float(np.quantile(x, alpha))
    indicator = (x <= value).astype(float)
    se_p = max(batch_means_se(indicator), np.sqrt(alpha * (1.0 - alpha) / m))
    density = float(gaussian_kde(x)(value)[0])
    if density <= 0.0 or not np.isfinite(density):
        density = 1.0 / max(np.ptp(x), 1e-300)
    return QuantileEstimate(level=float(alpha), value=value, mc_se=float(se_p / density))


def posterior_cdf_at(sample, component: int, t: float) -> float:
    """Fraction of retained draws with component < t."""
    x = _component(sample, component)
    return float(np.mean(x < t))


def write_chain_csv(sample, path: Union[str, Path]) -> Path:
    """Chain dump with columns iteration, theta_1..theta_d, log_post."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    draws = np.asarray(sample.draws)
    frame = pd.DataFrame(draws, columns=[f"theta_{j + 1}" for j in range(draws.shape[1])])
    frame.insert(0, "iteration", np.asarray(sample.iterations, dtype=int))
    frame["log_post"] = np.asarray(sample.log_post_trace)
    frame.to_csv(path, index=False, float_format="%.17g")
    return path


def summary_text(sample, quantiles: Iterable[QuantileEstimate] = ()) -> str:
    """Key=value summary of a chain and its quantiles."""
    lines = [
        f"draws={np.asarray(sample.draws).shape[0]}",
        f"acceptance_rate={sample.acceptance_rate:.6g}",
        f"failures={sample.failures}",
    ]
    lines += [f"ess_{j + 1}={e:.6g}" for j, e in enumerate(np.asarray(sample.ess))]
    for q in quantiles:
        lines.append(f"quantile_{q.level:g}={q.value:.10g}")
        lines.append(f"mc_se_{q.level:g}={q.mc_se:.6g}")
    return "\n".join(lines) + "\n"
