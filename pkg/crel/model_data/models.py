"""
Parametric model oracles, priors and exponential-family members.

Models work on a Dataset and return per-observation arrays so the same
derivative conventions as the estimating functions apply:
``score`` is n x d, ``score_jacobian`` n x d x d, ``score_hessian`` n x d x d x d.
"""

import logging
from abc import ABC, abstractmethod
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import special, stats

from crel.core.config import MEST_MAX_ITER, MEST_TOL
from crel.core.exceptions import ConvergenceError, DomainError, SchemaError
from crel.core.numdiff import central_diff
from .datasets import Dataset

logger = logging.getLogger(__name__)


def _theta(theta, d: int) -> np.ndarray:
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.size != d:
        raise DomainError(f"theta must have {d} components", {"got": int(theta.size)})
    return theta


# ============================================================================
# Parametric models
# ============================================================================

class ParametricModel(ABC):
    """Likelihood oracle: density, score and information tensors."""

    name: str = "model"
    dim: int = 1
    smooth: bool = True
    support: Tuple[float, float] = (-np.inf, np.inf)

    @abstractmethod
    def log_density(self, data: Dataset, theta) -> np.ndarray:
        """Per-observation log f(x_i; theta)."""

    @abstractmethod
    def score(self, data: Dataset, theta) -> np.ndarray:
        """Per-observation d log f / d theta, n x d."""

    @abstractmethod
    def fit_ml(self, data: Dataset) -> np.ndarray:
        """Maximum likelihood estimate."""

    def score_jacobian(self, data: Dataset, theta) -> np.ndarray:
        """Second derivatives of log f, n x d x d."""
        theta = _theta(theta, self.dim)
        return central_diff(lambda t: self.score(data, t), theta)

    def score_hessian(self, data: Dataset, theta) -> np.ndarray:
        """Third derivatives of log f, n x d x d x d."""
        theta = _theta(theta, self.dim)
        return central_diff(lambda t: self.score_jacobian(data, t), theta)

    def log_likelihood(self, data: Dataset, theta) -> float:
        return float(np.sum(self.log_density(data, theta)))

    def info2(self, data: Dataset, theta) -> np.ndarray:
        """L_rs = -(1/n) d^2 log L / d theta_r d theta_s."""
        L = -np.mean(self.score_jacobian(data, theta), axis=0)
        return 0.5 * (L + L.T)

    def info3(self, data: Dataset, theta) -> np.ndarray:
        """L_rst = -(1/n) d^3 log L / d theta_r d theta_s d theta_t."""
        return -np.mean(self.score_hessian(data, theta), axis=0)


class UnivariateModel(ParametricModel):
    """Model for scalar observations with a density and closed-form Fisher information."""

    @abstractmethod
    def pdf(self, x, theta) -> np.ndarray:
        """Density at the points x."""

    @abstractmethod
    def fisher_information(self, theta) -> np.ndarray:
        """Expected per-observation information."""


class LaplaceModel(UnivariateModel):
    """
    Laplace(theta, b) location model with known scale.

    The observed second derivative of |x - theta| is zero almost everywhere, so
    ``info2`` returns the expected information 1/b^2 and ``info3`` zeros.
    """

    name = "laplace"
    dim = 1
    smooth = False

    def __init__(self, scale: float = 1.0):
        if scale <= 0:
            raise DomainError("Laplace scale must be positive")
        self.scale = float(scale)

    def log_density(self, data, theta):
        (t,) = _theta(theta, 1)
        return -np.log(2.0 * self.scale) - np.abs(data.univariate() - t) / self.scale

    def score(self, data, theta):
        (t,) = _theta(theta, 1)
        return (np.sign(data.univariate() - t) / self.scale)[:, None]

    def score_jacobian(self, data, theta):
        return np.zeros((data.n, 1, 1))

    def score_hessian(self, data, theta):
        return np.zeros((data.n, 1, 1, 1))

    def info2(self, data, theta):
        return self.fisher_information(theta)

    def info3(self, data, theta):
        return np.zeros((1, 1, 1))

    def fit_ml(self, data):
        return np.array([np.median(data.univariate())])

    def fisher_information(self, theta):
        return np.array([[1.0 / self.scale ** 2]])

    def expected_score_derivatives(self, theta) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        (v1, v2, omega_deriv) of the score under the model at theta.

        E[sign(x - t)] / b = (exp(-|t - theta|/b) - 1) sign(t - theta) / b has
        slope -1/b^2 at t = theta from both sides and a symmetric second
        derivative of zero; E[psi^2] = 1/b^2 does not depend on t.
        """
        _theta(theta, 1)
        return (np.array([[1.0 / self.scale ** 2]]), np.zeros((1, 1, 1)), np.zeros((1, 1, 1)))

    def pdf(self, x, theta) -> np.ndarray:
        (t,) = _theta(theta, 1)
        return stats.laplace.pdf(x, loc=t, scale=self.scale)


class NormalModel(UnivariateModel):
    """
    Normal model. With ``sigma`` given, theta = (mu,); with ``sigma=None``,
    theta = (mu, sigma) and both are estimated (mu and sigma are orthogonal).
    """

    name = "normal"

    def __init__(self, sigma: Optional[float] = 1.0):
        if sigma is not None and sigma <= 0:
            raise DomainError("sigma must be positive")
        self.sigma = None if sigma is None else float(sigma)
        self.dim = 1 if sigma is not None else 2

    def _split(self, theta):
        theta = _theta(theta, self.dim)
        if self.sigma is None:
            if theta[1] <= 0:
                raise DomainError("sigma must be positive")
            return theta[0], theta[1]
        return theta[0], self.sigma

    def log_density(self, data, theta):
        mu, s = self._split(theta)
        x = data.univariate()
        return -0.5 * np.log(2.0 * np.pi) - np.log(s) - 0.5 * ((x - mu) / s) ** 2

    def score(self, data, theta):
        mu, s = self._split(theta)
        e = data.univariate() - mu
        if self.sigma is not None:
            return (e / s ** 2)[:, None]
        return np.column_stack([e / s ** 2, -1.0 / s + e ** 2 / s ** 3])

    def score_jacobian(self, data, theta):
        mu, s = self._split(theta)
        e = data.univariate() - mu
        if self.sigma is not None:
            return np.full((data.n, 1, 1), -1.0 / s ** 2)
        out = np.empty((data.n, 2, 2))
        out[:, 0, 0] = -1.0 / s ** 2
        out[:, 0, 1] = out[:, 1, 0] = -2.0 * e / s ** 3
        out[:, 1, 1] = 1.0 / s ** 2 - 3.0 * e ** 2 / s ** 4
        return out

    def score_hessian(self, data, theta):
        mu, s = self._split(theta)
        e = data.univariate() - mu
        if self.sigma is not None:
            return np.zeros((data.n, 1, 1, 1))
        out = np.empty((data.n, 2, 2, 2))
        out[:, 0, 0, 0] = 0.0
        # permutations of (mu, mu, sigma)
        for idx in [(0, 0, 1), (0, 1, 0), (1, 0, 0)]:
            out[(slice(None),) + idx] = 2.0 / s ** 3
        for idx in [(0, 1, 1), (1, 0, 1), (1, 1, 0)]:
            out[(slice(None),) + idx] = 6.0 * e / s ** 4
        out[:, 1, 1, 1] = -2.0 / s ** 3 + 12.0 * e ** 2 / s ** 5
        return out

    def fit_ml(self, data):
        x = data.univariate()
        if self.sigma is not None:
            return np.array([x.mean()])
        return np.array([x.mean(), x.std()])

    def fisher_information(self, theta):
        mu, s = self._split(theta)
        if self.sigma is not None:
            return np.array([[1.0 / s ** 2]])
        return np.diag([1.0 / s ** 2, 2.0 / s ** 2])

    def pdf(self, x, theta) -> np.ndarray:
        mu, s = self._split(theta)
        return stats.norm.pdf(x, loc=mu, scale=s)


class ExponentialMeanModel(UnivariateModel):
    """Exponential distribution parametrized by its mean theta > 0."""

    name = "exponential"
    dim = 1
    support = (0.0, np.inf)

    def _t(self, theta):
        (t,) = _theta(theta, 1)
        if t <= 0:
            raise DomainError("exponential mean must be positive")
        return t

    def log_density(self, data, theta):
        t = self._t(theta)
        return -np.log(t) - data.univariate() / t

    def score(self, data, theta):
        t = self._t(theta)
        return ((data.univariate() - t) / t ** 2)[:, None]

    def score_jacobian(self, data, theta):
        t = self._t(theta)
        return (1.0 / t ** 2 - 2.0 * data.univariate() / t ** 3)[:, None, None]

    def score_hessian(self, data, theta):
        t = self._t(theta)
        return (-2.0 / t ** 3 + 6.0 * data.univariate() / t ** 4)[:, None, None, None]

    def fit_ml(self, data):
        return np.array([data.univariate().mean()])

    def fisher_information(self, theta):
        return np.array([[1.0 / self._t(theta) ** 2]])

    def pdf(self, x, theta) -> np.ndarray:
        return stats.expon.pdf(x, scale=self._t(theta))


class PoissonRegressionModel(ParametricModel):
    """Poisson regression with log link, mu_i = exp(x_i' beta)."""

    name = "poisson_regression"
    smooth = True

    def __init__(self, dim: int = 3):
        self.dim = int(dim)

    def _mu(self, data: Dataset, theta):
        if not data.is_glm:
            raise SchemaError("Poisson regression needs response and design")
        beta = _theta(theta, self.dim)
        eta = data.design @ beta
        return np.exp(np.clip(eta, -700.0, 700.0))

    def log_density(self, data, theta):
        mu = self._mu(data, theta)
        y = data.response
        return y * np.log(mu) - mu - special.gammaln(y + 1.0)

    def score(self, data, theta):
        mu = self._mu(data, theta)
        return (data.response - mu)[:, None] * data.design

    def score_jacobian(self, data, theta):
        mu = self._mu(data, theta)
        X = data.design
        return -mu[:, None, None] * np.einsum("ir,is->irs", X, X)

    def score_hessian(self, data, theta):
        mu = self._mu(data, theta)
        X = data.design
        return -mu[:, None, None, None] * np.einsum("ir,is,it->irst", X, X, X)

    def fit_ml(self, data, theta0: Optional[Sequence[float]] = None):
        beta = np.zeros(self.dim) if theta0 is None else _theta(theta0, self.dim)
        if theta0 is None:
            beta[0] = np.log(max(np.mean(data.response), 1e-8))
        for it in range(MEST_MAX_ITER):
            grad = self.score(data, beta).sum(axis=0)
            hess = -self.score_jacobian(data, beta).sum(axis=0)
            step = np.linalg.solve(hess, grad)
            t = 1.0
            ll = self.log_likelihood(data, beta)
            while self.log_likelihood(data, beta + t * step) < ll - 1e-12 and t > 1e-8:
                t *= 0.5
            beta = beta + t * step
            if np.max(np.abs(grad)) <= MEST_TOL * data.n or np.max(np.abs(t * step)) < 1e-12:
                return beta
        raise ConvergenceError("Poisson ML fit did not converge",
                               {"iterations": MEST_MAX_ITER})


# ============================================================================
# Priors
# ============================================================================

class Prior(ABC):
    """Log prior xi = log pi with its first two derivatives."""

    dim: int = 1

    @abstractmethod
    def xi(self, theta) -> float:
        ...

    @abstractmethod
    def grad_xi(self, theta) -> np.ndarray:
        ...

    @abstractmethod
    def hess_xi(self, theta) -> np.ndarray:
        ...

    @property
    @abstractmethod
    def mode(self) -> np.ndarray:
        ...


class FlatPrior(Prior):
    """Improper constant prior, xi = 0."""

    def __init__(self, dim: int = 1):
        self.dim = int(dim)

    def xi(self, theta):
        return 0.0

    def grad_xi(self, theta):
        return np.zeros(self.dim)

    def hess_xi(self, theta):
        return np.zeros((self.dim, self.dim))

    @property
    def mode(self):
        return np.zeros(self.dim)

    def __repr__(self):
        return "flat"


class NormalPrior(Prior):
    """Independent Normal components N(mean_j, sd_j^2)."""

    def __init__(self, mean, sd):
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        sd = np.broadcast_to(np.atleast_1d(np.asarray(sd, dtype=float)), mean.shape).copy()
        if np.any(sd <= 0):
            raise DomainError("prior sd must be positive")
        self.mean = mean
        self.sd = sd
        self.dim = mean.size

    def xi(self, theta):
        z = (_theta(theta, self.dim) - self.mean) / self.sd
        return float(np.sum(-0.5 * z ** 2 - np.log(self.sd) - 0.5 * np.log(2.0 * np.pi)))

    def grad_xi(self, theta):
        return -(_theta(theta, self.dim) - self.mean) / self.sd ** 2

    def hess_xi(self, theta):
        return np.diag(-1.0 / self.sd ** 2)

    @property
    def mode(self):
        return self.mean.copy()

    def __repr__(self):
        return f"normal:{self.mean.tolist()},{self.sd.tolist()}"


def parse_prior(spec: str, dim: int = 1) -> Prior:
    """
    Build a prior from ``flat`` or ``normal:mean,sd``.

    Args:
        spec: Prior specification string
        dim: Parameter dimension; a scalar mean/sd is broadcast

    Returns:
        Prior instance

    Raises:
        DomainError: If the specification cannot be parsed
    """
    text = spec.strip().lower()
    if text == "flat":
        return FlatPrior(dim)
    if text.startswith("normal:"):
        try:
            mean_s, sd_s = text[len("normal:"):].split(",")
            mean = np.full(dim, float(mean_s))
            return NormalPrior(mean, float(sd_s))
        except ValueError:
            pass
    raise DomainError(f"Unknown prior specification: {spec}", {"expected": "flat | normal:mean,sd"})


# ============================================================================
# Exponential family members
# ============================================================================

class ExponentialFamilyModel(ABC):
    """
    f(y; v) = exp(v' U(y) - Gamma(v)) f0(y) with mean parameter theta = Gamma'(v).
    The score in the natural parameter is U(y) - Gamma'(v), i.e. the mean
    score x - theta with x = U(y).
    """

    name: str = "family"

    def sufficient_stat(self, y) -> np.ndarray:
        return np.asarray(y, dtype=float)

    @abstractmethod
    def log_partition(self, vartheta: float) -> float:
        ...

    @abstractmethod
    def mean_param(self, vartheta: float) -> float:
        """Gamma'(vartheta)."""

    @abstractmethod
    def natural_param(self, theta: float) -> float:
        """Inverse of mean_param."""

    @abstractmethod
    def sample(self, n: int, theta: float, rng: np.random.Generator) -> np.ndarray:
        ...

    @abstractmethod
    def parametric_model(self) -> ParametricModel:
        """Mean-parametrized likelihood oracle."""

    def natural_score(self, y, vartheta: float) -> np.ndarray:
        return self.sufficient_stat(y) - self.mean_param(vartheta)


class ExponentialFamily(ExponentialFamilyModel):
    """Exponential distribution: U(y) = y, v = -1/theta, Gamma(v) = -log(-v)."""

    name = "exponential"

    def log_partition(self, vartheta):
        if vartheta >= 0:
            raise DomainError("natural parameter must be negative")
        return -np.log(-vartheta)

    def mean_param(self, vartheta):
        if vartheta >= 0:
            raise DomainError("natural parameter must be negative")
        return -1.0 / vartheta

    def natural_param(self, theta):
        if theta <= 0:
            raise DomainError("mean must be positive")
        return -1.0 / theta

    def sample(self, n, theta, rng):
        return rng.exponential(scale=theta, size=n)

    def parametric_model(self):
        return ExponentialMeanModel()


class NormalFamily(ExponentialFamilyModel):
    """Unit-variance Normal: U(y) = y, Gamma(v) = v^2/2, theta = v."""

    name = "normal"

    def log_partition(self, vartheta):
        return 0.5 * vartheta ** 2

    def mean_param(self, vartheta):
        return float(vartheta)

    def natural_param(self, theta):
        return float(theta)

    def sample(self, n, theta, rng):
        return rng.normal(loc=theta, scale=1.0, size=n)

    def parametric_model(self):
        return NormalModel(sigma=1.0)


FAMILIES = {"exponential": ExponentialFamily, "normal": NormalFamily}
