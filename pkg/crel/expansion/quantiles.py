"""
Closed-form posterior quantile approximations.

eta denotes the standardized quantile sqrt(n) (theta_1 - theta_hat_1) / sqrt(nu^11).
Z-tilde(eta) = eta + G1/sqrt(n) + 3 G2/(2 sqrt(n)) - P/sqrt(n)
               + (G1/(2 sqrt(n))) eta^2 + (J1/(2n)) eta^3
with G1 = sum tau^r1 tau^s1 tau^t1 G_rst, G2 = sum tau^r1 sum_{a>1} tau^sa tau^ta G_rst,
P = sum tau^r1 (theta_hat - m0)_s xi''_rs(m0) and J1 = sum tau^r1 tau^s1 tau^t1 tau^w1 J_rstw.
G1 appears both in the constant and in the eta^2 coefficient; the two terms
come from (eta^2 + 2)/2 in the inversion.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm

from crel.core.config import EXPANSION_SEARCH_CAP
from crel.core.exceptions import DomainError, ExpansionError
from crel.model_data.models import Prior
from .coefficients import ExpansionCoeffs
from .tensors import MomentTensors

logger = logging.getLogger(__name__)


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)", {"alpha": alpha})


def _first(theta_hat) -> float:
    return float(np.atleast_1d(np.asarray(theta_hat, dtype=float))[0])


def quantile_expansion_first(theta_hat, tensors: MomentTensors, alpha: float, n: int) -> float:
    """theta_hat_1 + Phi^-1(alpha) sqrt(nu^11 / n)."""
    _check_alpha(alpha)
    return _first(theta_hat) + norm.ppf(alpha) * np.sqrt(tensors.nu_inv[0, 0] / n)


def z_n(theta01: float, theta_hat, tensors: MomentTensors, n: int) -> float:
    """sqrt(n) (theta01 - theta_hat_1) / sqrt(nu^11)."""
    return np.sqrt(n) * (float(theta01) - _first(theta_hat)) / np.sqrt(tensors.nu_inv[0, 0])


@dataclass(frozen=True)
class ZTildeTerms:
    """Contracted scalars of the Z-tilde polynomial."""
    G1: float
    G2: float
    P: float
    J1: float
    n: int

    def __call__(self, eta):
        rn = np.sqrt(self.n)
        eta = np.asarray(eta, dtype=float)
        return (eta + self.G1 / rn + 1.5 * self.G2 / rn - self.P / rn
                + (self.G1 / (2.0 * rn)) * eta ** 2 + (self.J1 / (2.0 * self.n)) * eta ** 3)

    def derivative(self, eta):
        rn = np.sqrt(self.n)
        eta = np.asarray(eta, dtype=float)
        return 1.0 + (self.G1 / rn) * eta + (1.5 * self.J1 / self.n) * eta ** 2

    def monotone_interval(self, cap: float = EXPANSION_SEARCH_CAP) -> Tuple[float, float]:
        """Largest interval around 0 inside [-cap, cap] where Z-tilde is increasing."""
        rn = np.sqrt(self.n)
        coeffs = [1.5 * self.J1 / self.n, self.G1 / rn, 1.0]
        roots = np.roots(coeffs) if abs(coeffs[0]) > 0 or abs(coeffs[1]) > 0 else np.array([])
        real = np.sort(roots[np.abs(roots.imag) < 1e-12].real)
        lo = max([r for r in real if r < 0], default=-cap)
        hi = min([r for r in real if r > 0], default=cap)
        lo, hi = max(lo, -cap), min(hi, cap)
        # stay strictly inside the stationary points
        shrink = 1e-9 * (hi - lo)
        return lo + shrink, hi - shrink


def z_tilde_terms(theta_hat, tensors: MomentTensors, coeffs: ExpansionCoeffs,
                  prior: Prior, n: int) -> ZTildeTerms:
    tau = tensors.tau
    t1 = tau[:, 0]
    rest = tau[:, 1:]
    G, J = coeffs.G, coeffs.J
    G1 = float(np.einsum("rst,r,s,t->", G, t1, t1, t1))
    G2 = float(np.einsum("rst,r,sa,ta->", G, t1, rest, rest)) if rest.shape[1] else 0.0
    m0 = np.asarray(prior.mode, dtype=float)
    offset = np.atleast_1d(np.asarray(theta_hat, dtype=float)) - m0
    P = float(t1 @ prior.hess_xi(m0) @ offset)
    J1 = float(np.einsum("rstw,r,s,t,w->", J, t1, t1, t1, t1))
    return ZTildeTerms(G1=G1, G2=G2, P=P, J1=J1, n=int(n))


def z_tilde(eta, theta_hat, tensors, coeffs, prior, n):
    """Z-tilde evaluated at eta."""
    return z_tilde_terms(theta_hat, tensors, coeffs, prior, n)(eta)


def quantile_expansion_higher(theta_hat, tensors: MomentTensors, coeffs: ExpansionCoeffs,
                              prior: Prior, alpha: float, n: int, gamma: float = None) -> float:
    """
    Posterior alpha-quantile from Phi(Z-tilde(eta)) = alpha.

    ``gamma`` is accepted for symmetry with the other operations; the
    Cressie-Read index enters through ``coeffs.J``.

    Raises:
        ExpansionError: If Phi^-1(alpha) is not reached on the increasing
            branch of Z-tilde around 0
    """
    _check_alpha(alpha)
    if gamma is not None and abs(gamma - coeffs.gamma) > 1e-12:
        raise DomainError("coeffs were built for a different gamma",
                          {"gamma": gamma, "coeffs_gamma": coeffs.gamma})
    terms = z_tilde_terms(theta_hat, tensors, coeffs, prior, n)
    target = norm.ppf(alpha)
    lo, hi = terms.monotone_interval()
    f_lo, f_hi = float(terms(lo)) - target, float(terms(hi)) - target
    if not (f_lo <= 0.0 <= f_hi):
        raise ExpansionError(details={"alpha": alpha, "interval": [lo, hi],
                                      "z_range": [f_lo + target, f_hi + target]})
    eta = brentq(lambda e: float(terms(e)) - target, lo, hi, xtol=1e-14, rtol=1e-14)
    return _first(theta_hat) + np.sqrt(tensors.nu_inv[0, 0] / n) * eta


def posterior_cdf_expansion(theta01: float, theta_hat, tensors, coeffs, prior, n) -> float:
    """Phi(Z-tilde(eta)) at eta = z_n(theta01)."""
    eta = z_n(theta01, theta_hat, tensors, n)
    return float(norm.cdf(z_tilde(eta, theta_hat, tensors, coeffs, prior, n)))


def z_tilde_moments(theta_hat, tensors, coeffs, prior, n) -> Tuple[float, float]:
    """
    Repeated-sampling mean and variance of Z-tilde(zeta) for standard normal zeta.

    mean = 3 G1/(2 sqrt(n)) + 3 G2/(2 sqrt(n)) - P/sqrt(n); variance = 1 + 3 J1/n,
    both to order 1/n.
    """
    t = z_tilde_terms(theta_hat, tensors, coeffs, prior, n)
    rn = np.sqrt(n)
    mean = 1.5 * t.G1 / rn + 1.5 * t.G2 / rn - t.P / rn
    variance = 1.0 + 3.0 * t.J1 / n
    return mean, variance
