"""
M-estimating functions psi(x, theta) and their derivatives.

Array conventions for a Dataset with n rows and theta in R^d:
    evaluate  -> n x d           psi_i^k
    jacobian  -> n x d x d       d psi_i^k / d theta_r            [i, k, r]
    hessian   -> n x d x d x d   d^2 psi_i^k / d theta_r d theta_s [i, k, r, s]
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from crel.core.exceptions import DomainError, NonSmoothError
from crel.core.numdiff import central_diff
from crel.model_data.datasets import Dataset
from crel.model_data.models import ParametricModel

logger = logging.getLogger(__name__)

Evaluator = Callable[[Dataset, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class EstimatingFunction:
    """
    psi with derivative access.

    ``location`` holds psi(u) for location families (u = x - theta), used by
    quadrature; ``kinks`` lists the points where psi(u) is not smooth.
    ``root`` is a closed-form solution of sum psi = 0 when one exists.
    """
    label: str
    dim_theta: int
    value_fn: Evaluator
    jacobian_fn: Optional[Evaluator] = None
    hessian_fn: Optional[Evaluator] = None
    smooth: bool = True
    location: Optional[Callable[[np.ndarray], np.ndarray]] = None
    kinks: Tuple[float, ...] = ()
    root: Optional[Callable[[Dataset], np.ndarray]] = None
    requires_glm: bool = False
    tuning: Optional[float] = field(default=None)

    def _theta(self, theta) -> np.ndarray:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.size != self.dim_theta:
            raise DomainError(f"{self.label}: theta must have {self.dim_theta} components",
                              {"got": int(theta.size)})
        return theta

    def evaluate(self, data: Dataset, theta) -> np.ndarray:
        """psi(x_i, theta) for every row, n x d."""
        return np.asarray(self.value_fn(data, self._theta(theta)), dtype=float)

    __call__ = evaluate

    def mean(self, data: Dataset, theta) -> np.ndarray:
        """psi-bar = (1/n) sum_i psi(x_i, theta)."""
        return self.evaluate(data, theta).mean(axis=0)

    def jacobian(self, data: Dataset, theta) -> np.ndarray:
        """d psi / d theta per row; numeric when no analytic form is attached."""
        if not self.smooth:
            raise NonSmoothError(f"{self.label} has no derivative in theta")
        theta = self._theta(theta)
        if self.jacobian_fn is not None:
            return np.asarray(self.jacobian_fn(data, theta), dtype=float)
        return central_diff(lambda t: self.evaluate(data, t), theta)

    def hessian(self, data: Dataset, theta) -> np.ndarray:
        """Second derivatives per row; numeric when no analytic form is attached."""
        if not self.smooth:
            raise NonSmoothError(f"{self.label} has no derivative in theta")
        theta = self._theta(theta)
        if self.hessian_fn is not None:
            return np.asarray(self.hessian_fn(data, theta), dtype=float)
        return central_diff(lambda t: self.jacobian(data, t), theta)

    def bind(self, data: Dataset) -> "EstimatingFunction":
        """Version of psi whose dimension matches ``data``."""
        return self

    def scaled(self, A) -> "EstimatingFunction":
        """psi multiplied by a fixed matrix, A psi."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        base = self

        def value(data, theta):
            return base.value_fn(data, theta) @ A.T

        jac = None
        if base.smooth:
            def jac(data, theta):
                return np.einsum("jk,ikr->ijr", A, base.jacobian(data, theta))
        return EstimatingFunction(
            label=f"{base.label}*A", dim_theta=base.dim_theta, value_fn=value,
            jacobian_fn=jac, smooth=base.smooth, root=base.root,
            requires_glm=base.requires_glm, tuning=base.tuning,
        )


def _location_family(label: str, psi_u, dpsi_u=None, d2psi_u=None, smooth=True,
                     kinks=(), root=None, tuning=None) -> EstimatingFunction:
    """psi(x, theta) = psi_u(x - theta) for univariate x and scalar theta."""

    def value(data, theta):
        return psi_u(data.univariate() - theta[0])[:, None]

    jac = hess = None
    if dpsi_u is not None:
        def jac(data, theta):
            return -dpsi_u(data.univariate() - theta[0])[:, None, None]
    if d2psi_u is not None:
        def hess(data, theta):
            return d2psi_u(data.univariate() - theta[0])[:, None, None, None]

    return EstimatingFunction(
        label=label, dim_theta=1, value_fn=value, jacobian_fn=jac, hessian_fn=hess,
        smooth=smooth, location=psi_u, kinks=tuple(kinks), root=root, tuning=tuning,
    )


def psi_mean() -> EstimatingFunction:
    """Score of the sample mean, psi = x - theta."""
    return _location_family(
        "mean",
        psi_u=lambda u: np.asarray(u, dtype=float),
        dpsi_u=lambda u: np.ones_like(u, dtype=float),
        d2psi_u=lambda u: np.zeros_like(u, dtype=float),
        root=lambda data: np.array([data.univariate().mean()]),
    )


def _median_u(u):
    # x - theta <= 0 takes the +1/2 branch
    return np.where(np.asarray(u) <= 0.0, 0.5, -0.5)


def psi_median() -> EstimatingFunction:
    """Two-valued median score: 1/2 for x - theta <= 0, -1/2 otherwise."""
    return _location_family(
        "median", psi_u=_median_u, smooth=False, kinks=(0.0,),
        root=lambda data: np.array([np.median(data.univariate())]),
    )


def psi_huber(c: float = 1.345) -> EstimatingFunction:
    """Huber psi_c, clipping x - theta at +/- c."""
    if c <= 0:
        raise DomainError("Huber constant must be positive", {"c": c})
    c = float(c)
    return _location_family(
        f"huber({c:g})",
        psi_u=lambda u: np.clip(u, -c, c),
        dpsi_u=lambda u: (np.abs(u) <= c).astype(float),
        d2psi_u=lambda u: np.zeros_like(u, dtype=float),
        kinks=(-c, c), tuning=c,
    )


def psi_tukey(k: float = 4.685) -> EstimatingFunction:
    """Tukey biweight, u (1 - (u/k)^2)^2 on |u| <= k and 0 outside."""
    if k <= 0:
        raise DomainError("biweight constant must be positive", {"k": k})
    k = float(k)

    def psi_u(u):
        t = np.asarray(u, dtype=float) / k
        return np.where(np.abs(t) <= 1.0, u * (1.0 - t ** 2) ** 2, 0.0)

    def dpsi_u(u):
        t = np.asarray(u, dtype=float) / k
        return np.where(np.abs(t) <= 1.0, (1.0 - t ** 2) * (1.0 - 5.0 * t ** 2), 0.0)

    def d2psi_u(u):
        t = np.asarray(u, dtype=float) / k
        return np.where(np.abs(t) <= 1.0, (4.0 * t / k) * (5.0 * t ** 2 - 3.0), 0.0)

    return _location_family(f"tukey({k:g})", psi_u=psi_u, dpsi_u=dpsi_u, d2psi_u=d2psi_u,
                            kinks=(-k, k), tuning=k)


def psi_score(model: ParametricModel) -> EstimatingFunction:
    """ML score of a parametric model used as the estimating function."""

    def value(data, theta):
        return model.score(data, theta)

    jac = hess = None
    if model.smooth:
        def jac(data, theta):
            return model.score_jacobian(data, theta)

        def hess(data, theta):
            return model.score_hessian(data, theta)

    return EstimatingFunction(
        label=f"score({model.name})", dim_theta=model.dim, value_fn=value,
        jacobian_fn=jac, hessian_fn=hess, smooth=model.smooth,
        root=lambda data: np.asarray(model.fit_ml(data), dtype=float),
        requires_glm=model.name == "poisson_regression",
    )
