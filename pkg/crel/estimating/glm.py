"""
GLM quasi-likelihood estimating functions, classical and Huber-robust.

Supported (link, variance) pairs: ("log", "poisson") and ("identity", "gaussian").
"""

import logging
from typing import Tuple

import numpy as np
from scipy import stats

from crel.core.config import POISSON_TAIL_WIDTH
from crel.core.exceptions import DomainError, SchemaError
from crel.model_data.datasets import Dataset
from .functions import EstimatingFunction

logger = logging.getLogger(__name__)

FAMILIES = {("log", "poisson"), ("identity", "gaussian")}


def _check_family(link: str, variance: str) -> Tuple[str, str]:
    key = (link.lower(), variance.lower())
    if key not in FAMILIES:
        raise DomainError(f"Unsupported link/variance pair: {link}/{variance}",
                          {"supported": sorted("/".join(k) for k in FAMILIES)})
    return key


def _require_glm(data: Dataset) -> None:
    if not data.is_glm:
        raise SchemaError("GLM estimating functions need response and design columns")


def _mean_and_variance(key, data: Dataset, beta: np.ndarray):
    """mu_i, V(mu_i) and d mu_i / d beta (n x d)."""
    X = data.design
    eta = X @ beta
    if key == ("log", "poisson"):
        mu = np.exp(np.clip(eta, -700.0, 700.0))
        return mu, mu, mu[:, None] * X
    return eta, np.ones_like(eta), X


def psi_glm(link: str = "log", variance: str = "poisson") -> EstimatingFunction:
    """
    Per-observation quasi-likelihood score (y_i - mu_i)/V(mu_i) * d mu_i/d beta.

    For the Poisson log link this is (y_i - mu_i) x_i.
    """
    key = _check_family(link, variance)

    def value(data, beta):
        _require_glm(data)
        mu, v, dmu = _mean_and_variance(key, data, beta)
        return ((data.response - mu) / v)[:, None] * dmu

    def jacobian(data, beta):
        _require_glm(data)
        mu, _, _ = _mean_and_variance(key, data, beta)
        X = data.design
        w = mu if key == ("log", "poisson") else np.ones_like(mu)
        return -w[:, None, None] * np.einsum("ik,ir->ikr", X, X)

    def hessian(data, beta):
        _require_glm(data)
        mu, _, _ = _mean_and_variance(key, data, beta)
        X = data.design
        if key == ("log", "poisson"):
            return -mu[:, None, None, None] * np.einsum("ik,ir,is->ikrs", X, X, X)
        n, d = X.shape
        return np.zeros((n, d, d, d))

    return _GLMFunction(label=f"glm({key[0]},{key[1]})", value_fn=value,
                        jacobian_fn=jacobian, hessian_fn=hessian)


def poisson_expected_huber(mu: np.ndarray, c: float, method: str = "closed") -> np.ndarray:
    """
    E[psi_c((Y - mu)/sqrt(mu))] for Y ~ Poisson(mu).

    ``method="sum"`` sums over y = 0..ceil(mu + 10 sqrt(mu)) directly;
    ``method="closed"`` uses y p(y) = mu p(y - 1) to collapse the sum over the
    unclipped window into Poisson CDF values. Both are exact up to the
    truncated tail.
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    if method == "sum":
        out = np.empty_like(mu)
        for i, m in enumerate(mu):
            y = np.arange(0, int(np.ceil(m + POISSON_TAIL_WIDTH * np.sqrt(m))) + 1)
            r = (y - m) / np.sqrt(m)
            out[i] = np.sum(np.clip(r, -c, c) * stats.poisson.pmf(y, m))
        return out
    if method != "closed":
        raise DomainError(f"Unknown method: {method}")
    s = np.sqrt(mu)
    lo = np.maximum(np.ceil(mu - c * s), 0.0)  # first y inside the window
    hi = np.floor(mu + c * s)                   # last y inside the window
    F = stats.poisson.cdf
    upper = c * stats.poisson.sf(hi, mu)
    lower = c * F(lo - 1.0, mu)
    inside_prob = F(hi, mu) - F(lo - 1.0, mu)
    inside_y = mu * (F(hi - 1.0, mu) - F(lo - 2.0, mu))
    return upper - lower + (inside_y - mu * inside_prob) / s


def psi_glm_robust(c: float = 1.6, link: str = "log", variance: str = "poisson") -> EstimatingFunction:
    """
    Huber quasi-likelihood score with the Fisher-consistency correction.

    Row i is psi_c(r_i)/sqrt(V(mu_i)) * d mu_i/d beta minus
    a(beta) = (1/n) sum_j E[psi_c(r_j)]/sqrt(V(mu_j)) * d mu_j/d beta,
    r_i = (y_i - mu_i)/sqrt(V(mu_i)) the Pearson residual. The jacobian is
    numeric.
    """
    if c <= 0:
        raise DomainError("Huber constant must be positive", {"c": c})
    c = float(c)
    key = _check_family(link, variance)

    def value(data, beta):
        _require_glm(data)
        mu, v, dmu = _mean_and_variance(key, data, beta)
        sv = np.sqrt(v)
        r = (data.response - mu) / sv
        rows = (np.clip(r, -c, c) / sv)[:, None] * dmu
        if key == ("log", "poisson"):
            expected = poisson_expected_huber(mu, c)
        else:
            expected = np.zeros_like(mu)
        correction = ((expected / sv)[:, None] * dmu).mean(axis=0)
        return rows - correction

    return _GLMFunction(label=f"glm_robust({c:g})", value_fn=value, tuning=c)


class _GLMFunction(EstimatingFunction):
    """EstimatingFunction whose dimension follows the design matrix."""

    def __init__(self, label, value_fn, jacobian_fn=None, hessian_fn=None, tuning=None):
        super().__init__(label=label, dim_theta=0, value_fn=value_fn, jacobian_fn=jacobian_fn,
                         hessian_fn=hessian_fn, smooth=True, requires_glm=True, tuning=tuning)

    def _theta(self, theta):
        return np.atleast_1d(np.asarray(theta, dtype=float))

    def bind(self, data: Dataset) -> EstimatingFunction:
        """Copy with dim_theta fixed by the design."""
        _require_glm(data)
        return EstimatingFunction(
            label=self.label, dim_theta=data.design.shape[1], value_fn=self.value_fn,
            jacobian_fn=self.jacobian_fn, hessian_fn=self.hessian_fn, smooth=True,
            requires_glm=True, tuning=self.tuning,
        )
