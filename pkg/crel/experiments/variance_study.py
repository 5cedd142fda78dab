"""
Studies of higher-order behaviour: variance of posterior quantiles across
gamma, the score-function cancellation and expansion remainders.
"""

import logging
from typing import List, Optional, Sequence

import numpy as np

from crel.core.audit import RunLogger
from crel.core.exceptions import DomainError
from crel.core.models import ScalingResult, ScalingRow, VarianceRow, VarianceStudyResult
from crel.core.streams import derive_rng
from crel.estimating.functions import psi_mean
from crel.expansion.series import gelr_expansion
from crel.expansion.tensors import compute_tensors
from crel.likelihood.ratio import gelr
from crel.model_data.datasets import Dataset
from crel.model_data.generators import generate_exponential, generate_laplace
from crel.model_data.models import (
    ExponentialFamily,
    ExponentialFamilyModel,
    ExponentialMeanModel,
    FlatPrior,
    LaplaceModel,
)
from crel.posterior.grid import grid_posterior
from .efficiency import theorem4_statistic
from .runner import run_replications

logger = logging.getLogger(__name__)

THEOREM5_GAMMAS = (-2.0, -1.0, -0.5, -2.0 / 3.0, 0.0)


def _variance_replication(index: int, payload: dict) -> List[float]:
    family: ExponentialFamilyModel = payload["family"]
    rng = derive_rng(payload["seed"], index)
    data = Dataset(obs=family.sample(payload["n"], payload["theta"], rng)[:, None])
    psi = psi_mean()
    prior = FlatPrior(1)
    return [grid_posterior(data, psi, prior, g).quantile(payload["alpha"])
            for g in payload["gammas"]]


def theorem5_variance_study(family: Optional[ExponentialFamilyModel] = None, n: int = 30,
                            M: int = 500, gammas: Sequence[float] = THEOREM5_GAMMAS,
                            alpha: float = 0.9, seed: int = 0, theta: float = 1.0,
                            threads: int = 1) -> VarianceStudyResult:
    """
    Monte Carlo variance of the alpha posterior quantile for each gamma.

    Every replication evaluates all gammas on the same dataset (mean psi,
    flat prior, quadrature posterior), so gamma comparisons are paired:
    ``diff_vs_reference`` is the mean of the per-replication differences of
    squared deviations against gamma = 0, with its standard error.

    Args:
        family: Exponential-family data model (default: Exponential mean model)
        n: Sample size
        M: Replications
        gammas: Cressie-Read indices
        alpha: Quantile level
        seed: Master seed
        theta: True mean
        threads: Worker processes

    Returns:
        VarianceStudyResult
    """
    family = family or ExponentialFamily()
    gammas = [float(g) for g in gammas]
    payload = {"family": family, "n": n, "theta": theta, "alpha": alpha, "gammas": gammas,
               "seed": seed}
    RunLogger.log_run_started("thm5", seed, {"family": family.name, "n": n, "M": M,
                                             "alpha": alpha, "gammas": gammas})
    outcomes = run_replications(_variance_replication, [payload] * M, threads, "thm5")
    Q = np.array([o.value for o in outcomes if o.ok], dtype=float)
    Q = Q[np.all(np.isfinite(Q), axis=1)]
    sq = (Q - Q.mean(axis=0)) ** 2
    ref = gammas.index(0.0) if 0.0 in gammas else None
    rows = []
    for j, g in enumerate(gammas):
        row = VarianceRow(gamma=g, variance=float(Q[:, j].var(ddof=1)))
        if ref is not None and j != ref:
            d = sq[:, j] - sq[:, ref]
            row = row.model_copy(update={
                "diff_vs_reference": float(d.mean()) * Q.shape[0] / (Q.shape[0] - 1),
                "se_diff": float(d.std(ddof=1) / np.sqrt(d.size)),
            })
        rows.append(row)
    return VarianceStudyResult(family=family.name, alpha=alpha, M=M, n=n, seed=seed, rows=rows,
                               failures=M - Q.shape[0])


CANCELLATION_MODELS = {"exponential": ExponentialMeanModel, "laplace": LaplaceModel}


def _cancellation_replication(index: int, payload: dict) -> List[float]:
    rng = derive_rng(payload["seed"], payload["n"], payload["rep"])
    if payload["model"] == "laplace":
        data = generate_laplace(payload["n"], payload["theta"], rng)
    else:
        data = generate_exponential(payload["n"], payload["theta"], rng)
    raw = theorem4_statistic(data, CANCELLATION_MODELS[payload["model"]]())
    return [raw, raw / np.sqrt(payload["n"])]


def _slope(ns, values) -> float:
    return float(np.polyfit(np.log(ns), np.log(values), 1)[0])


def theorem4_cancellation(n_list: Sequence[int] = (200, 400), M: int = 200, seed: int = 0,
                          theta: float = 1.0, threads: int = 1,
                          model: str = "exponential") -> ScalingResult:
    """
    Median |(G111 - L111/3) / L11| with the ML score as psi, for each sample size.

    Two rows per n: ``plug_in`` is the statistic itself (root-n rate) and
    ``quantile_term`` divides it by sqrt(n), its size in the posterior
    quantile (rate 1/n). With ``model="laplace"`` the derivative tensors come
    from the fitted model and the cancellation is exact at the sample median.

    Raises:
        DomainError: If the model is not one of CANCELLATION_MODELS
    """
    if model not in CANCELLATION_MODELS:
        raise DomainError(f"Unknown model: {model}", {"expected": sorted(CANCELLATION_MODELS)})
    payloads = [{"seed": seed, "n": int(n), "rep": r, "theta": theta, "model": model}
                for n in n_list for r in range(M)]
    outcomes = run_replications(_cancellation_replication, payloads, threads, "thm4")
    rows = []
    for j, term in enumerate(("plug_in", "quantile_term")):
        for n in n_list:
            values = [abs(o.value[j]) for o, p in zip(outcomes, payloads) if p["n"] == n and o.ok]
            rows.append(ScalingRow(n=int(n), term=term, value=float(np.median(values))))
    slopes = {}
    if len(n_list) > 1:
        for term in ("plug_in", "quantile_term"):
            picked = [r for r in rows if r.term == term]
            if all(r.value > 0.0 for r in picked):
                slopes[term] = _slope([r.n for r in picked], [r.value for r in picked])
    return ScalingResult(study=f"thm4:{model}", seed=seed, reps=M, rows=rows, slopes=slopes)


def _remainder_replication(index: int, payload: dict) -> List[float]:
    rng = derive_rng(payload["seed"], payload["n"], payload["rep"])
    data = generate_exponential(payload["n"], 1.0, rng)
    psi = psi_mean()
    exact = gelr(data, psi, 1.0, payload["gamma"]).value
    tensors = compute_tensors(data, psi, 1.0)
    psi_bar = psi.mean(data, 1.0)
    return [abs(exact - gelr_expansion(tensors, psi_bar, payload["gamma"], k))
            for k in payload["orders"]]


def expansion_order_study(ns: Sequence[int] = (50, 100, 200, 400, 800), reps: int = 200,
                          gamma: float = 0.0, seed: int = 0, orders: Sequence[int] = (1, 2, 3),
                          threads: int = 1) -> ScalingResult:
    """
    Mean absolute remainder of each GELR expansion order at the true mean of
    Exponential(1) data, with log-log slopes against n.
    """
    orders = [int(k) for k in orders]
    payloads = [{"seed": seed, "n": int(n), "rep": r, "gamma": float(gamma), "orders": orders}
                for n in ns for r in range(reps)]
    outcomes = run_replications(_remainder_replication, payloads, threads, "expansion")
    rows = []
    for n in ns:
        values = np.array([o.value for o, p in zip(outcomes, payloads) if p["n"] == n and o.ok])
        values = values[np.all(np.isfinite(values), axis=1)]
        for j, k in enumerate(orders):
            rows.append(ScalingRow(n=int(n), order=k, value=float(values[:, j].mean())))
    slopes = {
        f"order_{k}": _slope([r.n for r in rows if r.order == k], [r.value for r in rows if r.order == k])
        for k in orders
    }
    return ScalingResult(study="expansion", seed=seed, reps=reps, rows=rows, slopes=slopes)
