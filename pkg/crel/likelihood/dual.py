"""
Inner Cressie-Read problem: Lagrange multiplier lambda_gamma(theta) and weights.

For u_i = 1 + lambda' psi_i the weights are
    gamma = 0 (EL):   w_i proportional to 1/u_i
    gamma = -1 (ET):  w_i proportional to exp(lambda' psi_i)
    otherwise:        w_i proportional to u_i^a, a = -1/(gamma + 1)
and lambda is the root of sum_i w_i psi_i = 0. Each branch root is the
minimizer of a convex merit function, found by damped Newton from lambda = 0.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, softmax

from crel.core.config import BRANCH_EPS, POSITIVITY_FLOOR, SOLVER_MAX_ITER, SOLVER_TOL
from crel.core.exceptions import ConvergenceError, HullError
from .hull import convex_hull_check

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LambdaSolution:
    gamma: float
    lam: np.ndarray
    residual_norm: float
    iterations: int
    in_domain: bool
    branch: str


@dataclass(frozen=True)
class CRWeights:
    weights: np.ndarray
    gamma: float


def branch_of(gamma: float) -> str:
    if abs(gamma) < BRANCH_EPS:
        return "el"
    if abs(gamma + 1.0) < BRANCH_EPS:
        return "et"
    return "cr"


class _Branch:
    """Merit function, log-weights and domain bound for one gamma."""

    def __init__(self, P: np.ndarray, gamma: float):
        self.P = P
        self.n = P.shape[0]
        self.kind = branch_of(gamma)
        if self.kind == "el":
            self.a = -1.0
            self.bound = max(POSITIVITY_FLOOR, 1.0 / self.n)
        elif self.kind == "et":
            self.a = None
            self.bound = None
        else:
            self.a = -1.0 / (gamma + 1.0)
            self.bound = POSITIVITY_FLOOR

    def u(self, lam):
        return 1.0 + self.P @ lam

    def feasible(self, lam) -> bool:
        if self.bound is None:
            return bool(np.all(np.isfinite(self.P @ lam)))
        return bool(np.all(self.u(lam) > self.bound))

    def log_weights(self, lam) -> np.ndarray:
        """Unnormalized log-weights."""
        if self.kind == "et":
            return self.P @ lam
        return self.a * np.log(self.u(lam))

    def merit(self, lam) -> float:
        if self.kind == "et":
            return float(logsumexp(self.P @ lam) - np.log(self.n))
        logu = np.log(self.u(lam))
        if self.kind == "el":
            return float(-np.sum(logu))
        b = self.a + 1.0
        with np.errstate(over="ignore", invalid="ignore"):
            val = np.sign(self.a) * np.sum(np.expm1(b * logu)) / b
        return float(val) if np.isfinite(val) else np.inf

    def grad_hess(self, lam):
        """Gradient and Hessian of the merit function."""
        P = self.P
        if self.kind == "et":
            w = softmax(P @ lam)
            g = P.T @ w
            H = (P * w[:, None]).T @ P - np.outer(g, g)
            return g, H
        u = self.u(lam)
        if self.kind == "el":
            g = -(P / u[:, None]).sum(axis=0)
            H = (P / u[:, None] ** 2).T @ P
            return g, H
        a = self.a
        with np.errstate(over="ignore"):
            ua = np.exp(a * np.log(u))
        g = np.sign(a) * P.T @ ua
        H = abs(a) * (P * (ua / u)[:, None]).T @ P
        return g, H


def _normalized(log_w: np.ndarray) -> np.ndarray:
    return softmax(log_w)


def _residual(P: np.ndarray, log_w: np.ndarray) -> float:
    w = _normalized(log_w)
    return float(np.max(np.abs(P.T @ w)))


def solve_lambda(psi_matrix, gamma: float, check_hull: bool = True) -> LambdaSolution:
    """
    Solve the gamma-branch equation for lambda by damped Newton.

    Args:
        psi_matrix: n x d estimating-function values at theta
        gamma: Cressie-Read index
        check_hull: Run the convex hull check first

    Returns:
        LambdaSolution

    Raises:
        HullError: If 0 is not interior to the hull of the rows
        ConvergenceError: If 200 iterations do not bring the constraint
            residual below 1e-10 * max(1, max|psi|)
    """
    P = np.asarray(psi_matrix, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    if check_hull and not convex_hull_check(P):
        raise HullError(details={"n": int(P.shape[0]), "d": int(P.shape[1])})

    n, d = P.shape
    branch = _Branch(P, gamma)
    lam = np.zeros(d)
    tol = SOLVER_TOL * max(1.0, float(np.max(np.abs(P))) if P.size else 1.0)
    if not np.any(P):
        return LambdaSolution(float(gamma), lam, 0.0, 0, True, branch.kind)

    merit = branch.merit(lam)
    res = _residual(P, branch.log_weights(lam))
    best = res
    for it in range(1, SOLVER_MAX_ITER + 1):
        if res <= tol:
            return LambdaSolution(float(gamma), lam, res, it - 1, True, branch.kind)
        g, H = branch.grad_hess(lam)
        try:
            step = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            step = -np.linalg.lstsq(H, g, rcond=None)[0]
        t = 1.0
        accepted = False
        for _ in range(60):
            cand = lam + t * step
            if branch.feasible(cand):
                cand_merit = branch.merit(cand)
                cand_res = _residual(P, branch.log_weights(cand))
                if np.isfinite(cand_merit) and (cand_merit <= merit + 1e-4 * t * float(g @ step)
                                                or cand_res < res):
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            break
        lam, merit, res = cand, cand_merit, cand_res
        best = min(best, res)
    if res <= tol:
        return LambdaSolution(float(gamma), lam, res, it, True, branch.kind)
    raise ConvergenceError(
        "Cressie-Read dual solve did not converge",
        {"gamma": float(gamma), "best_residual": best, "iterations": it},
    )


def weights_from_lambda(psi_matrix, solution: LambdaSolution) -> CRWeights:
    """Normalized weights of the solution's gamma branch."""
    P = np.asarray(psi_matrix, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    branch = _Branch(P, solution.gamma)
    return CRWeights(weights=_normalized(branch.log_weights(solution.lam)), gamma=solution.gamma)


def solve_weights(psi_matrix, gamma: float):
    """Hull check, lambda solve and weights in one call."""
    solution = solve_lambda(psi_matrix, gamma)
    return solution, weights_from_lambda(psi_matrix, solution)
