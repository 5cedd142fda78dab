"""Moment tensors, higher-order expansions and quantile approximations."""

from .tensors import MomentTensors, compute_tensors, symmetrize, silverman_bandwidth
from .coefficients import ExpansionCoeffs, h_coeffs, G_tensor, J_tensor, expansion_coeffs
from .series import gelr_expansion
from .quantiles import (
    quantile_expansion_first,
    quantile_expansion_higher,
    z_n,
    z_tilde,
    z_tilde_terms,
    z_tilde_moments,
    posterior_cdf_expansion,
    ZTildeTerms,
)

__all__ = [
    "MomentTensors", "compute_tensors", "symmetrize", "silverman_bandwidth",
    "ExpansionCoeffs", "h_coeffs", "G_tensor", "J_tensor", "expansion_coeffs",
    "gelr_expansion", "quantile_expansion_first", "quantile_expansion_higher", "z_n",
    "z_tilde", "z_tilde_terms", "z_tilde_moments", "posterior_cdf_expansion", "ZTildeTerms",
]
