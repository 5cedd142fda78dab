"""
Higher-order expansion coefficients h1/h2, G_rst and J_rstw(gamma).
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from crel.core.config import BRANCH_EPS
from .tensors import MomentTensors, symmetrize


@dataclass(frozen=True, eq=False)
class ExpansionCoeffs:
    G: np.ndarray
    J: np.ndarray
    h1: float
    h2: float
    gamma: float


def h_coeffs(gamma: float) -> Tuple[float, float]:
    """(h1, h2) = ((4 - gamma^2)/4, (2 - gamma^2)/4); (3/4, 1/4) on the ET branch."""
    if abs(gamma + 1.0) < BRANCH_EPS:
        return 0.75, 0.25
    g2 = float(gamma) ** 2
    return (4.0 - g2) / 4.0, (2.0 - g2) / 4.0


def _B(t: MomentTensors) -> np.ndarray:
    # B[a, r] = sum_k omega^{ak} v^k_r
    return t.omega_inv @ t.v1


def G_tensor(t: MomentTensors) -> np.ndarray:
    """
    G_rst = sum v^k_r v^l_st omega^{kl} + sum v^k_r v^l_s omega^{kl}_t
            - (2/3) sum alpha_abc B_ar B_bs B_ct,
    symmetrized over (r, s, t).
    """
    V, Oi = t.v1, t.omega_inv
    B = _B(t)
    first = np.einsum("kr,lst,kl->rst", V, t.v2, Oi)
    second = np.einsum("kr,ls,klt->rst", V, V, t.omega_deriv)
    third = np.einsum("abc,ar,bs,ct->rst", t.alpha3, B, B, B)
    return symmetrize(first + second - (2.0 / 3.0) * third)


def J_tensor(t: MomentTensors, gamma: float) -> np.ndarray:
    """
    J_rstw = h1 sum Pi_ors omega^{oq} Pi_qtw - h2 sum alpha_abcd B_ar B_bs B_ct B_dw,
    Pi_ors = sum alpha_oab B_ar B_bs, symmetrized over (r, s, t, w).
    """
    h1, h2 = h_coeffs(gamma)
    B = _B(t)
    Pi = np.einsum("oab,ar,bs->ors", t.alpha3, B, B)
    cubic = np.einsum("ors,oq,qtw->rstw", Pi, t.omega_inv, Pi)
    quartic = np.einsum("abcd,ar,bs,ct,dw->rstw", t.alpha4, B, B, B, B)
    return symmetrize(h1 * cubic - h2 * quartic)


def expansion_coeffs(t: MomentTensors, gamma: float) -> ExpansionCoeffs:
    h1, h2 = h_coeffs(gamma)
    return ExpansionCoeffs(G=G_tensor(t), J=J_tensor(t, gamma), h1=h1, h2=h2, gamma=float(gamma))
