"""
Subcommand implementations. Each returns the list of files it wrote.
"""

import logging
from pathlib import Path
from typing import List, Tuple

import numpy as np
import pandas as pd

from crel.core.exceptions import DomainError, HullError, UsageError
from crel.core.models import PosteriorConfig, RunConfig
from crel.estimating.functions import EstimatingFunction
from crel.estimating.registry import SCORE_MODELS as PARAMETRIC, psi_from_name
from crel.experiments.studies import reproduce_table
from crel.likelihood.dual import solve_weights
from crel.likelihood.ratio import gelr, profile_curve
from crel.model_data.datasets import Dataset, load_dataset
from crel.model_data.models import parse_prior
from crel.posterior.sampler import sample_posterior
from crel.posterior.summaries import posterior_quantile, summary_text, write_chain_csv

logger = logging.getLogger(__name__)


def _inputs(cfg: RunConfig) -> Tuple[Dataset, EstimatingFunction]:
    if not cfg.data:
        raise UsageError("a data file is required")
    data = load_dataset(cfg.data)
    psi = psi_from_name(cfg.psi).bind(data)
    return data, psi


def _theta(cfg: RunConfig, psi: EstimatingFunction) -> np.ndarray:
    if cfg.theta is None:
        raise UsageError("--theta is required")
    theta = np.asarray(cfg.theta, dtype=float)
    if theta.size != psi.dim_theta:
        raise UsageError(f"--theta needs {psi.dim_theta} values", {"got": int(theta.size)})
    return theta


def _columns(prefix: str, k: int) -> List[str]:
    return [prefix] if k == 1 else [f"{prefix}{j + 1}" for j in range(k)]


def parse_grid(text: str) -> np.ndarray:
    """``lo:hi:m`` to an evenly spaced grid."""
    try:
        lo_s, hi_s, m_s = text.split(":")
        lo, hi, m = float(lo_s), float(hi_s), int(m_s)
    except ValueError:
        raise UsageError(f"grid must be lo:hi:m, got {text!r}")
    if m < 1 or (m > 1 and hi <= lo):
        raise UsageError("grid needs m >= 1 and lo < hi", {"grid": text})
    return np.linspace(lo, hi, m) if m > 1 else np.array([lo])


def cmd_weights(cfg: RunConfig, out: Path) -> List[Path]:
    """weights.csv with columns i, data row, psi row and weight."""
    data, psi = _inputs(cfg)
    P = psi.evaluate(data, _theta(cfg, psi))
    solution, weights = solve_weights(P, cfg.gamma)
    frame = pd.DataFrame({"i": np.arange(1, data.n + 1)})
    for name, col in zip(_columns("x", data.p), data.obs.T):
        frame[name] = col
    for name, col in zip(_columns("psi", P.shape[1]), P.T):
        frame[name] = col
    frame["weight"] = weights.weights
    path = out / "weights.csv"
    frame.to_csv(path, index=False, float_format="%.12g")
    logger.info(f"weights: branch={solution.branch}, iterations={solution.iterations}, "
                f"residual={solution.residual_norm:.3e}")
    return [path]


def cmd_gelr(cfg: RunConfig, out: Path) -> List[Path]:
    """
    gelr.txt with the statistic at theta.

    Raises:
        HullError: After writing gelr=inf when 0 is outside the convex hull
    """
    data, psi = _inputs(cfg)
    theta = _theta(cfg, psi)
    result = gelr(data, psi, theta, cfg.gamma)
    lines = [f"theta={','.join(f'{t:.12g}' for t in theta)}", f"gamma={cfg.gamma:g}",
             f"hull_ok={str(result.hull_ok).lower()}",
             f"gelr={result.value:.12g}" if result.hull_ok else "gelr=inf"]
    path = out / "gelr.txt"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("\n".join(lines))
    if not result.hull_ok:
        raise HullError(details={"theta": theta.tolist(), "output": str(path)})
    return [path]


def cmd_profile(cfg: RunConfig, out: Path) -> List[Path]:
    """profile.csv with columns theta, gelr and optionally parametric."""
    data, psi = _inputs(cfg)
    if not cfg.grid:
        raise UsageError("--grid lo:hi:m is required")
    model = None
    if cfg.parametric:
        if cfg.parametric not in PARAMETRIC:
            raise DomainError(f"Unknown parametric model: {cfg.parametric}",
                              {"known": sorted(PARAMETRIC)})
        model = PARAMETRIC[cfg.parametric]()
    curve = profile_curve(data, psi, parse_grid(cfg.grid), cfg.gamma, model)
    frame = pd.DataFrame({"theta": curve.theta, "gelr": curve.gelr})
    if curve.parametric is not None:
        frame["parametric"] = curve.parametric
    path = out / "profile.csv"
    frame.to_csv(path, index=False, float_format="%.12g")
    return [path]


def cmd_posterior(cfg: RunConfig, out: Path, seed: int) -> List[Path]:
    """quantiles.csv, summary.txt and, with ``chain``, chain.csv."""
    data, psi = _inputs(cfg)
    prior = parse_prior(cfg.prior, psi.dim_theta)
    try:
        config = PosteriorConfig(chain_length=cfg.chain_length, burn_in=cfg.burn_in,
                                 thin=cfg.thin, adapt=cfg.adapt,
                                 proposal_scale=cfg.proposal_scale, seed=seed)
    except ValueError as e:
        raise UsageError(f"Invalid sampler settings: {e}")
    sample = sample_posterior(data, psi, prior, config, cfg.gamma)
    quantiles = [posterior_quantile(sample, cfg.component, a) for a in cfg.alpha]
    q_path = out / "quantiles.csv"
    pd.DataFrame([q.model_dump() for q in quantiles]).to_csv(q_path, index=False,
                                                             float_format="%.12g")
    s_path = out / "summary.txt"
    s_path.write_text(summary_text(sample, quantiles), encoding="utf-8")
    paths = [q_path, s_path]
    if cfg.chain:
        paths.append(write_chain_csv(sample, out / "chain.csv"))
    return paths


def cmd_reproduce(cfg: RunConfig, out: Path, seed: int) -> Tuple[List[Path], float]:
    """Table files and the share of failed cells."""
    if not cfg.table:
        raise UsageError("--table is required")
    _, paths, share = reproduce_table(cfg.table, cfg.scale, seed, cfg.threads, out, cfg.reference)
    return paths, share
