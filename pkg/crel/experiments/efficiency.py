"""
Analytic bias of empirical posterior quantiles and the efficiency oracles behind it.
"""

import logging
from typing import Iterable, List, Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.stats import norm

from crel.core.exceptions import DomainError, NonSmoothError, QuadratureError
from crel.core.models import BiasReport
from crel.estimating.functions import EstimatingFunction, psi_score
from crel.estimating.solver import solve_m_estimate
from crel.expansion.coefficients import G_tensor
from crel.expansion.tensors import compute_tensors
from crel.model_data.datasets import Dataset
from crel.model_data.models import LaplaceModel, ParametricModel, Prior, UnivariateModel

logger = logging.getLogger(__name__)

TABLE2_ALPHAS = (0.25, 0.5, 0.75, 0.95, 0.99)


def _psi_on(psi: EstimatingFunction, x: np.ndarray, theta0: float) -> np.ndarray:
    if psi.location is not None:
        return np.asarray(psi.location(x - theta0), dtype=float)
    return psi.evaluate(Dataset(obs=x[:, None]), theta0)[:, 0]


def _expectation(fn, model: UnivariateModel, theta0: float, breaks: Iterable[float]) -> float:
    lo, hi = model.support
    points = sorted({float(b) for b in breaks if lo < b < hi})
    edges = [lo] + points + [hi]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        value, _ = integrate.quad(lambda x: float(fn(np.array([x]))[0] * model.pdf(x, theta0)),
                                  a, b, limit=200)
        total += value
    return total


def asymptotic_efficiency_inv(psi: EstimatingFunction, model: UnivariateModel,
                              theta0: float = 0.0) -> float:
    """
    Inverse asymptotic efficiency of the M-estimator at the model.

    Sandwich form (Omega / V^2) I_F with Omega = E[psi^2], V = E[psi * score]
    and I_F the Fisher information; the expectations are integrated with
    quad, split at the kinks of psi.

    Args:
        psi: Scalar estimating function
        model: Model with ``pdf`` and closed-form Fisher information
        theta0: Parameter value where the expectations are taken

    Returns:
        asy.eff^-1 (1 for the ML score)

    Raises:
        QuadratureError: If a moment is not finite
    """
    if not isinstance(model, UnivariateModel) or psi.dim_theta != 1 or model.dim != 1:
        raise DomainError("efficiency oracle is defined for scalar parameters")
    breaks = [theta0 + k for k in psi.kinks] + [theta0]

    def score(x):
        return model.score(Dataset(obs=x[:, None]), theta0)[:, 0]

    try:
        with np.errstate(all="ignore"):
            omega = _expectation(lambda x: _psi_on(psi, x, theta0) ** 2, model, theta0, breaks)
            v = _expectation(lambda x: _psi_on(psi, x, theta0) * score(x), model, theta0, breaks)
    except (ValueError, ZeroDivisionError) as e:
        raise QuadratureError(details={"psi": psi.label, "error": str(e)})
    info = float(np.ravel(model.fisher_information(theta0))[0])
    if not (np.isfinite(omega) and np.isfinite(v)) or v == 0.0:
        raise QuadratureError(details={"psi": psi.label, "omega": omega, "v": v})
    eff_inv = omega / v ** 2 * info
    logger.debug(f"{psi.label} at {model.name}: Omega={omega:.6g}, V={v:.6g}, eff^-1={eff_inv:.6g}")
    return float(eff_inv)


def _check_levels(alpha: float, eff_inv: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)", {"alpha": alpha})
    # Cramer-Rao: eff_inv >= 1 up to quadrature error
    if eff_inv < 1.0 - 1e-9:
        raise DomainError("inverse efficiency below the Cramer-Rao bound", {"eff_inv": eff_inv})


def bias_coverage(alpha: float, eff_inv: float) -> float:
    """phi(Phi^-1(alpha)) Phi^-1(alpha) (sqrt(eff_inv) - 1)."""
    _check_levels(alpha, eff_inv)
    z = norm.ppf(alpha)
    return float(norm.pdf(z) * z * (np.sqrt(max(eff_inv, 1.0)) - 1.0))


def bias_quantile(alpha: float, eff_inv: float, var_ml: float) -> float:
    """Phi^-1(alpha) sqrt(var_ml) (sqrt(eff_inv) - 1)."""
    _check_levels(alpha, eff_inv)
    if not var_ml > 0.0:
        raise DomainError("var_ml must be positive", {"var_ml": var_ml})
    return float(norm.ppf(alpha) * np.sqrt(var_ml) * (np.sqrt(max(eff_inv, 1.0)) - 1.0))


def bias_table(psis: Sequence[EstimatingFunction], alphas: Sequence[float] = TABLE2_ALPHAS,
               model: Optional[UnivariateModel] = None, n: Optional[int] = None) -> List[BiasReport]:
    """
    Analytic coverage (and, with ``n``, quantile) bias for each psi and alpha.

    The default model is Laplace(0, 1).
    """
    model = LaplaceModel() if model is None else model
    reports = []
    for psi in psis:
        eff_inv = asymptotic_efficiency_inv(psi, model)
        var_ml = None
        if n is not None:
            var_ml = 1.0 / (n * float(np.ravel(model.fisher_information(0.0))[0]))
        for a in alphas:
            reports.append(BiasReport(
                psi=psi.label,
                alpha=a,
                bias_coverage=bias_coverage(a, eff_inv),
                bias_quantile=bias_quantile(a, eff_inv, var_ml) if var_ml else 0.0,
                eff_inv=eff_inv,
            ))
    return reports


def _fits(data: Dataset, psi: EstimatingFunction, model: ParametricModel):
    theta_ml = np.atleast_1d(model.fit_ml(data))
    theta_m = solve_m_estimate(psi, data, theta_ml).theta_hat
    tensors = compute_tensors(data, psi, theta_m)
    L = np.atleast_2d(model.info2(data, theta_ml))
    return theta_m, theta_ml, tensors, L


def r_term(data: Dataset, psi: EstimatingFunction, model: ParametricModel,
           prior: Optional[Prior], alpha: float) -> float:
    """
    First-order coverage term at the fitted quantities:
    sqrt(n)(theta_M - theta_ML)/sqrt(L^11) + (sqrt(nu^11/L^11) - 1) Phi^-1(alpha).

    ``prior`` does not enter at this order; it is accepted so both plug-in
    terms share one signature.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)", {"alpha": alpha})
    theta_m, theta_ml, tensors, L = _fits(data, psi, model)
    L_up = np.linalg.inv(L)[0, 0]
    nu_up = tensors.nu_inv[0, 0]
    n = data.n
    shift = np.sqrt(n) * (theta_m[0] - theta_ml[0]) / np.sqrt(L_up)
    return float(shift + (np.sqrt(nu_up / L_up) - 1.0) * norm.ppf(alpha))


def rstar_term(data: Dataset, psi: EstimatingFunction, model: ParametricModel,
               prior: Prior, alpha: float) -> float:
    """
    Higher-order coverage term for an orthogonal interest parameter:

        sqrt(n L11)(theta_M - theta_ML) + (sqrt(L11/nu11) - 1) z
        + (xi_1(theta_M) L11/nu11 - xi_1(theta_ML)) / (sqrt(n) sqrt(L11))
        + (G111 (L11/nu11)^2 - L111/3)(1 + z^2/2) / (sqrt(n) L11)

    with z = Phi^-1(alpha), nu11 = K11 at the M-estimate and L11, L111 the
    observed information tensors at the ML estimate.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)", {"alpha": alpha})
    theta_m, theta_ml, tensors, L = _fits(data, psi, model)
    n = data.n
    z = norm.ppf(alpha)
    L11 = L[0, 0]
    nu11 = tensors.K[0, 0]
    ratio = L11 / nu11
    G111 = G_tensor(tensors)[0, 0, 0]
    L111 = float(np.atleast_3d(model.info3(data, theta_ml))[0, 0, 0])
    xi_m = float(np.atleast_1d(prior.grad_xi(theta_m))[0])
    xi_ml = float(np.atleast_1d(prior.grad_xi(theta_ml))[0])
    terms = (
        np.sqrt(n * L11) * (theta_m[0] - theta_ml[0]),
        (np.sqrt(ratio) - 1.0) * z,
        (xi_m * ratio - xi_ml) / (np.sqrt(n) * np.sqrt(L11)),
        (G111 * ratio ** 2 - L111 / 3.0) * (1.0 + 0.5 * z ** 2) / (np.sqrt(n) * L11),
    )
    return float(sum(terms))


def theorem4_statistic(data: Dataset, model: ParametricModel, scaled: bool = False) -> float:
    """
    (G111 - L111/3) / L11 with the model's ML score as psi, at the ML estimate.

    The plug-in is root-n consistent for zero. With ``scaled`` it is divided by
    sqrt(n), which is its contribution to the posterior quantile and is O(1/n).
    A non-smooth score takes its derivative tensors from the fitted model.

    Raises:
        NonSmoothError: If the score is non-smooth and the model has no
            expected score derivatives
    """
    psi = psi_score(model)
    theta_ml = np.atleast_1d(model.fit_ml(data))
    derivatives = None
    if not model.smooth:
        expected = getattr(model, "expected_score_derivatives", None)
        if expected is None:
            raise NonSmoothError(details={"model": model.name})
        derivatives = expected(theta_ml)
    tensors = compute_tensors(data, psi, theta_ml, derivatives)
    G111 = G_tensor(tensors)[0, 0, 0]
    L11 = float(np.atleast_2d(model.info2(data, theta_ml))[0, 0])
    L111 = float(np.atleast_3d(model.info3(data, theta_ml))[0, 0, 0])
    value = (G111 - L111 / 3.0) / L11
    return float(value / np.sqrt(data.n) if scaled else value)
