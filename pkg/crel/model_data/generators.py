"""
Data generating processes for the simulation studies.

Every generator accepts either an integer seed (mapped to its own Philox
stream) or a ready Generator, so callers inside a replication can pass the
replication stream directly.
"""

from typing import Optional, Sequence, Union

import numpy as np

from crel.core.models import ContaminationConfig
from crel.core.exceptions import DomainError
from crel.core.streams import derive_rng
from .datasets import Dataset

SeedLike = Union[int, np.random.Generator]


def _rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return derive_rng(int(seed))


def _check_n(n: int) -> int:
    if int(n) < 1:
        raise DomainError("n must be at least 1", {"n": n})
    return int(n)


def generate_laplace(n: int, theta: float, seed: SeedLike, scale: float = 1.0) -> Dataset:
    """n i.i.d. Laplace(theta, scale) draws."""
    rng = _rng(seed)
    return Dataset(obs=rng.laplace(loc=theta, scale=scale, size=_check_n(n)))


def generate_normal(n: int, mu: float, sigma: float, seed: SeedLike) -> Dataset:
    rng = _rng(seed)
    return Dataset(obs=rng.normal(loc=mu, scale=sigma, size=_check_n(n)))


def generate_exponential(n: int, theta: float, seed: SeedLike) -> Dataset:
    """n i.i.d. Exponential draws with mean theta."""
    if theta <= 0:
        raise DomainError("exponential mean must be positive")
    rng = _rng(seed)
    return Dataset(obs=rng.exponential(scale=theta, size=_check_n(n)))


def generate_design(n: int, seed: SeedLike) -> np.ndarray:
    """
    Intercept plus two standardized covariates.

    x1 ~ N(3, 0.7) and x2 ~ U(1, 1.5), each recentered and rescaled to sample
    mean 0 and variance 1.
    """
    rng = _rng(seed)
    n = _check_n(n)
    x1 = rng.normal(3.0, 0.7, size=n)
    x2 = rng.uniform(1.0, 1.5, size=n)
    cols = [np.ones(n)]
    for x in (x1, x2):
        sd = x.std()
        cols.append((x - x.mean()) / sd if sd > 0 else x - x.mean())
    return np.column_stack(cols)


def generate_contaminated_poisson(
    n: int,
    beta: Sequence[float],
    config: Optional[ContaminationConfig],
    seed: SeedLike,
    design: Optional[np.ndarray] = None,
) -> Dataset:
    """
    Poisson regression responses with a share of outliers.

    A fraction ``clean_fraction`` of responses is Poisson(exp(x'beta)); the rest
    is Normal(outlier_mean, outlier_spread) rounded to the nearest non-negative
    integer. Draw order is fixed (design, Poisson responses, outlier mask,
    outlier values) so ``clean_fraction=1`` reproduces the clean responses of
    any contaminated run with the same seed.

    Args:
        n: Sample size
        beta: Regression coefficients (intercept first)
        config: Contamination settings; None uses the defaults
        seed: Integer seed or Generator
        design: Optional fixed design; drawn from the same stream when omitted

    Returns:
        GLM Dataset
    """
    config = config or ContaminationConfig()
    rng = _rng(seed)
    n = _check_n(n)
    X = generate_design(n, rng) if design is None else np.asarray(design, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if X.shape != (n, beta.size):
        raise DomainError("design shape does not match n and beta",
                          {"design": list(X.shape), "beta": int(beta.size)})
    mu = np.exp(X @ beta)
    y = rng.poisson(mu).astype(float)
    outlier = rng.random(n) >= config.clean_fraction
    noise = rng.normal(config.outlier_mean, config.outlier_sd, size=n)
    y = np.where(outlier, np.maximum(0.0, np.rint(noise)), y)
    return Dataset.from_glm(y, X)
