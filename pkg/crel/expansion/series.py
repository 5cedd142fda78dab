"""
Expansions of the GELR statistic in powers of psi-bar.
"""

import numpy as np

from crel.core.exceptions import DomainError
from .coefficients import h_coeffs
from .tensors import MomentTensors


def gelr_expansion(tensors: MomentTensors, psi_bar, gamma: float, order: int,
                   dispersion_correction: bool = False) -> float:
    """
    Order-k approximation of the GELR statistic (same scale as the statistic).

    With z = Omega^-1 psi-bar:
        order 1: n psi-bar' z
        order 2: + n (2/3) sum alpha_abc z_a z_b z_c
        order 3: + n [h1 Pi' Omega^-1 Pi - h2 sum alpha_abcd z_a z_b z_c z_d],
                 Pi_t = sum alpha_tab z_a z_b

    ``dispersion_correction`` adds -(gamma^2/4) n (psi-bar' z)^2 to order 3,
    a quartic term of the exact expansion that is zero at gamma = 0.
    """
    if order not in (1, 2, 3):
        raise DomainError("order must be 1, 2 or 3", {"order": order})
    psi_bar = np.atleast_1d(np.asarray(psi_bar, dtype=float))
    z = tensors.omega_inv @ psi_bar
    q = float(psi_bar @ z)
    total = q
    if order >= 2:
        total += (2.0 / 3.0) * float(np.einsum("abc,a,b,c->", tensors.alpha3, z, z, z))
    if order >= 3:
        h1, h2 = h_coeffs(gamma)
        Pi = np.einsum("tab,a,b->t", tensors.alpha3, z, z)
        total += h1 * float(Pi @ tensors.omega_inv @ Pi)
        total -= h2 * float(np.einsum("abcd,a,b,c,d->", tensors.alpha4, z, z, z, z))
        if dispersion_correction:
            total -= (float(gamma) ** 2 / 4.0) * q ** 2
    return tensors.n * total
