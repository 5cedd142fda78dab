"""
Moment tensors of the estimating function at a parameter value.

Index conventions (all arrays are numpy):
    omega[k, l]            (1/n) sum psi^k psi^l
    v1[k, r]               v^k_r  = -(1/n) sum d psi^k / d theta_r
    v2[k, r, s]            v^k_rs = -(1/n) sum d^2 psi^k / d theta_r d theta_s
    omega_deriv[k, l, t]   d omega^{kl} / d theta_t   (omega^{kl} entries of Omega^-1)
    alpha3[k, l, m], alpha4[j, k, l, m]   third and fourth cross moments
    K = V' Omega^-1 V, nu_inv = K^-1 = tau tau'
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from crel.core.exceptions import DomainError, SingularityError
from crel.core.numdiff import central_diff
from crel.estimating.functions import EstimatingFunction
from crel.model_data.datasets import Dataset

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MomentTensors:
    theta: np.ndarray
    n: int
    omega: np.ndarray
    omega_inv: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    omega_deriv: np.ndarray
    alpha3: np.ndarray
    alpha4: np.ndarray
    K: np.ndarray
    nu_inv: np.ndarray
    tau: np.ndarray

    @property
    def d(self) -> int:
        return self.omega.shape[0]


def symmetrize(T: np.ndarray, axes=None) -> np.ndarray:
    """Average of T over all permutations of the given axes (default: all)."""
    axes = tuple(range(T.ndim)) if axes is None else tuple(axes)
    acc = np.zeros_like(T, dtype=float)
    perms = list(itertools.permutations(axes))
    for perm in perms:
        order = list(range(T.ndim))
        for src, dst in zip(axes, perm):
            order[src] = dst
        acc += np.transpose(T, order)
    return acc / len(perms)


def silverman_bandwidth(x: np.ndarray) -> float:
    """1.06 min(sd, IQR/1.34) n^(-1/5)."""
    x = np.asarray(x, dtype=float)
    sd = x.std(ddof=1) if x.size > 1 else 0.0
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34) if q75 > q25 else sd
    if spread <= 0:
        spread = 1.0
    return 1.06 * spread * x.size ** (-0.2)


def _omega(P: np.ndarray) -> np.ndarray:
    om = P.T @ P / P.shape[0]
    return 0.5 * (om + om.T)


def _checked_inverse(M: np.ndarray, what: str) -> np.ndarray:
    try:
        np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        raise SingularityError(f"{what} is not positive definite",
                               {"eigenvalues": np.linalg.eigvalsh(M).tolist()})
    inv = np.linalg.inv(M)
    return 0.5 * (inv + inv.T)


def compute_tensors(data: Dataset, psi: EstimatingFunction, theta,
                    derivatives: Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]] = None) -> MomentTensors:
    """
    All moment tensors at theta.

    Smooth psi uses its (analytic or numeric) derivatives. For non-smooth psi
    the derivatives of psi-bar are replaced by difference quotients with a
    Silverman bandwidth, which smooths over the jumps. ``derivatives`` =
    (v1, v2, omega_deriv) overrides both, e.g. with expectations under a
    fitted model.

    Raises:
        SingularityError: If Omega or K is not positive definite
    """
    psi = psi.bind(data)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    P = psi.evaluate(data, theta)
    n, d = P.shape
    omega = _omega(P)
    omega_inv = _checked_inverse(omega, "Omega")

    def omega_inv_at(t):
        return np.linalg.inv(_omega(psi.evaluate(data, t)))

    if derivatives is not None:
        v1, v2, omega_deriv = (np.asarray(a, dtype=float) for a in derivatives)
        if v1.shape != (d, d) or v2.shape != (d, d, d) or omega_deriv.shape != (d, d, d):
            raise DomainError("derivative tensors do not match the dimension of psi", {"d": d})
    elif psi.smooth:
        v1 = -psi.jacobian(data, theta).mean(axis=0)
        v2 = -psi.hessian(data, theta).mean(axis=0)
        omega_deriv = central_diff(omega_inv_at, theta)
    else:
        h = np.full(d, silverman_bandwidth(data.univariate()))
        psi_bar = lambda t: psi.mean(data, t)
        v1 = -central_diff(psi_bar, theta, h)
        v2 = -central_diff(lambda t: central_diff(psi_bar, t, h), theta, h)
        omega_deriv = central_diff(omega_inv_at, theta, h)

    v2 = symmetrize(v2, axes=(1, 2))
    omega_deriv = symmetrize(omega_deriv, axes=(0, 1))
    alpha3 = np.einsum("ik,il,im->klm", P, P, P) / n
    alpha4 = np.einsum("ij,ik,il,im->jklm", P, P, P, P) / n

    K = v1.T @ omega_inv @ v1
    K = 0.5 * (K + K.T)
    nu_inv = _checked_inverse(K, "K")
    tau = np.linalg.cholesky(nu_inv)
    return MomentTensors(theta=theta, n=n, omega=omega, omega_inv=omega_inv, v1=v1, v2=v2,
                         omega_deriv=omega_deriv, alpha3=alpha3, alpha4=alpha4, K=K,
                         nu_inv=nu_inv, tau=tau)
