"""
Repeated-sampling studies on the Normal-prior Laplace location model:
coverage bias of empirical posterior quantiles, validity of the posterior
CDF at the true value and calibration of the GELR statistic.
"""

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import stats

from crel.core.audit import RunLogger
from crel.core.exceptions import CrelException
from crel.core.models import CalibrationResult, CoverageCell, CoverageResult, PosteriorConfig
from crel.core.streams import derive_rng, derive_seed
from crel.estimating.registry import psi_from_name
from crel.likelihood.ratio import gelr
from crel.model_data.generators import generate_laplace, generate_normal
from crel.model_data.models import LaplaceModel, NormalPrior
from crel.posterior.grid import grid_posterior, parametric_grid_posterior
from crel.posterior.sampler import sample_parametric_posterior, sample_posterior
from crel.posterior.summaries import posterior_cdf_at, posterior_quantile
from .runner import run_replications

logger = logging.getLogger(__name__)

TABLE1_PSIS = ("mean", "median", "huber", "tukey")
TABLE1_GAMMAS = (0.0, -1.0)
TABLE1_ALPHAS = (0.25, 0.5, 0.75, 0.95, 0.99)

# stream tags inside one replication
_DATA, _REFERENCE, _CHAIN = 0, 1, 2


def _reference_cdf(data, prior, config: PosteriorConfig, method: str, seed: int, index: int):
    model = LaplaceModel()
    if method == "grid":
        return parametric_grid_posterior(model, data, prior).cdf
    ref_config = config.scaled(4, seed=derive_seed(seed, index, _REFERENCE))
    sample = sample_parametric_posterior(model, data, prior, ref_config)
    return lambda t: posterior_cdf_at(sample, 0, t)


def _gel_quantiles(data, psi, prior, gamma, alphas, config, method, seed):
    if method == "grid":
        post = grid_posterior(data, psi, prior, gamma)
        return [post.quantile(a) for a in alphas]
    sample = sample_posterior(data, psi, prior, config.model_copy(update={"seed": seed}), gamma)
    return [posterior_quantile(sample, 0, a).value for a in alphas]


def _table1_replication(index: int, payload: dict) -> Dict[tuple, Optional[float]]:
    seed = payload["seed"]
    rng = derive_rng(seed, index, _DATA)
    theta = rng.normal()
    data = generate_laplace(payload["n"], theta, rng)
    prior = NormalPrior(0.0, 1.0)
    rho = _reference_cdf(data, prior, payload["config"], payload["method"], seed, index)
    out = {}
    cell = 0
    for name in payload["psis"]:
        psi = psi_from_name(name)
        for gamma in payload["gammas"]:
            chain_seed = derive_seed(seed, index, _CHAIN, cell)
            cell += 1
            try:
                qs = _gel_quantiles(data, psi, prior, gamma, payload["alphas"],
                                    payload["config"], payload["method"], chain_seed)
            except CrelException as e:
                logger.debug(f"replication {index}, {name}, gamma={gamma}: {e.message}")
                qs = [None] * len(payload["alphas"])
            for a, q in zip(payload["alphas"], qs):
                out[(name, float(gamma), float(a))] = None if q is None else rho(q) - a
    return out


def reduce_cells(table: str, statistic: str, outcomes, psis, gammas, alphas, seed, M, n,
                 parameters=(None,)) -> CoverageResult:
    cells = []
    for name in psis:
        for gamma in gammas:
            for a in alphas:
                for par in parameters:
                    key = (name, float(gamma), float(a)) if par is None else (par, name, float(gamma), float(a))
                    values = [o.value[key] for o in outcomes
                              if o.ok and o.value.get(key) is not None]
                    c = CoverageCell(
                        psi=name, gamma=float(gamma), alpha=float(a), parameter=par,
                        value=float(np.median(values)) if values else None,
                        replications=len(values), failures=M - len(values),
                    )
                    RunLogger.log_cell_completed(table, c.model_dump())
                    cells.append(c)
    return CoverageResult(
        table=table, statistic=statistic, seed=seed, M=M, n=n, gammas=[float(g) for g in gammas],
        psis=list(psis), alphas=[float(a) for a in alphas], cells=cells,
        failed_replications=sum(1 for o in outcomes if not o.ok),
    )


def coverage_simulation(M: int = 80, n: int = 110, gammas: Sequence[float] = TABLE1_GAMMAS,
                        psis: Sequence[str] = TABLE1_PSIS, alphas: Sequence[float] = TABLE1_ALPHAS,
                        seed: int = 0, config: Optional[PosteriorConfig] = None,
                        method: str = "mcmc", threads: int = 1) -> CoverageResult:
    """
    Median coverage bias of empirical posterior quantiles, theta ~ N(0, 1),
    x | theta ~ Laplace(theta, 1).

    In every replication the GEL quantile of each (psi, gamma) is located
    under the parametric Laplace posterior of the same data; the cell value
    is the median of rho(quantile) - alpha over replications.

    Args:
        M: Replications
        n: Sample size
        gammas: Cressie-Read indices
        psis: Estimating function names
        alphas: Quantile levels
        seed: Master seed
        config: Sampler settings for the GEL chains (reference chains run 4x longer)
        method: ``mcmc`` or ``grid`` (quadrature posteriors for both sides)
        threads: Worker processes

    Returns:
        CoverageResult with one cell per (psi, gamma, alpha)
    """
    config = config or PosteriorConfig()
    RunLogger.log_run_started("table1", seed, {"M": M, "n": n, "gammas": list(gammas),
                                               "psis": list(psis), "method": method})
    payload = {"seed": seed, "n": n, "psis": list(psis), "gammas": [float(g) for g in gammas],
               "alphas": [float(a) for a in alphas], "config": config, "method": method}
    outcomes = run_replications(_table1_replication, [payload] * M, threads, "table1")
    return reduce_cells("1", "median_coverage_bias", outcomes, psis, gammas, alphas, seed, M, n)


def _validity_replication(index: int, payload: dict) -> float:
    seed = payload["seed"]
    rng = derive_rng(seed, index, _DATA)
    theta = rng.normal()
    data = generate_laplace(payload["n"], theta, rng)
    prior = NormalPrior(0.0, 1.0)
    psi = psi_from_name(payload["psi"])
    if payload["method"] == "grid":
        return grid_posterior(data, psi, prior, payload["gamma"]).cdf(theta)
    config = payload["config"].model_copy(update={"seed": derive_seed(seed, index, _CHAIN)})
    sample = sample_posterior(data, psi, prior, config, payload["gamma"])
    return posterior_cdf_at(sample, 0, theta)


def validity_study(n: int = 110, M: int = 500, gamma: float = 0.0, seed: int = 0,
                   psi: str = "mean", method: str = "grid",
                   config: Optional[PosteriorConfig] = None, threads: int = 1) -> CalibrationResult:
    """
    KS distance of the GEL posterior CDF at the true theta from Uniform(0, 1),
    theta ~ N(0, 1), x | theta ~ Laplace(theta, 1).
    """
    payload = {"seed": seed, "n": n, "psi": psi, "gamma": float(gamma), "method": method,
               "config": config or PosteriorConfig()}
    RunLogger.log_run_started("validity", seed, {"M": M, "n": n, "gamma": gamma, "psi": psi})
    outcomes = run_replications(_validity_replication, [payload] * M, threads, "validity")
    values = np.array([o.value for o in outcomes if o.ok])
    ks = stats.kstest(values, "uniform")
    return CalibrationResult(study="validity", psi=psi, gamma=float(gamma), M=M, n=n, seed=seed,
                             ks=float(ks.statistic), pvalue=float(ks.pvalue),
                             failures=M - values.size)


def _wilks_replication(index: int, payload: dict) -> List[float]:
    rng = derive_rng(payload["seed"], index, _DATA)
    data = generate_normal(payload["n"], 0.0, 1.0, rng)
    psi = psi_from_name(payload["psi"])
    return [gelr(data, psi, 0.0, g).value for g in payload["gammas"]]


def wilks_calibration(n: int = 200, M: int = 2000, gammas: Sequence[float] = (0.0, -1.0),
                      seed: int = 0, psi: str = "mean", threads: int = 1) -> List[CalibrationResult]:
    """KS distance of the GELR statistic at the true mean from chi-square(1), N(0, 1) data."""
    payload = {"seed": seed, "n": n, "psi": psi, "gammas": [float(g) for g in gammas]}
    RunLogger.log_run_started("wilks", seed, payload)
    outcomes = run_replications(_wilks_replication, [payload] * M, threads, "wilks")
    values = np.array([o.value for o in outcomes if o.ok])
    results = []
    for j, g in enumerate(gammas):
        column = values[:, j] if values.size else np.array([])
        column = column[np.isfinite(column)]
        ks = stats.kstest(column, stats.chi2(df=1).cdf)
        results.append(CalibrationResult(
            study="wilks", psi=psi, gamma=float(g), M=M, n=n, seed=seed,
            ks=float(ks.statistic), pvalue=float(ks.pvalue), failures=M - column.size,
        ))
    return results
