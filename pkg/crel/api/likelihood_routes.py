"""
Weights, GELR and profile endpoints.
"""

import logging

import numpy as np
from fastapi import APIRouter

from crel.core.exceptions import DomainError
from crel.core.models import (
    GELRResponse,
    ProfilePoint,
    ProfileRequest,
    ProfileResponse,
    WeightsRequest,
    WeightsResponse,
)
from crel.likelihood.dual import solve_weights
from crel.likelihood.ratio import gelr, profile_curve
from crel.estimating.registry import SCORE_MODELS as PARAMETRIC
from .common import resolve

logger = logging.getLogger(__name__)

router = APIRouter(tags=["likelihood"])


@router.post("/weights", response_model=WeightsResponse, response_model_by_alias=True)
def weights_endpoint(request: WeightsRequest):
    """
    Cressie-Read weights and multiplier at theta.

    Args:
        request: Data rows, psi, gamma and theta
    """
    data, psi = resolve(request.data, request.psi)
    P = psi.evaluate(data, request.theta)
    solution, weights = solve_weights(P, request.gamma)
    w = weights.weights
    return WeightsResponse(
        weights=w.tolist(),
        lambda_=solution.lam.tolist(),
        gamma=request.gamma,
        gelr=float(-2.0 * np.sum(np.log(data.n * w))),
        iterations=solution.iterations,
        residual_norm=solution.residual_norm,
    )


@router.post("/gelr", response_model=GELRResponse)
def gelr_endpoint(request: WeightsRequest):
    """
    GELR statistic at theta; value is null when 0 is outside the hull.

    Args:
        request: Data rows, psi, gamma and theta
    """
    data, psi = resolve(request.data, request.psi)
    result = gelr(data, psi, request.theta, request.gamma)
    return GELRResponse(value=result.value if result.hull_ok else None, hull_ok=result.hull_ok)


@router.post("/profile", response_model=ProfileResponse)
def profile_endpoint(request: ProfileRequest):
    """
    GELR curve over a grid with an optional parametric overlay.

    Args:
        request: Data rows, psi, gamma, grid and optional parametric model name
    """
    data, psi = resolve(request.data, request.psi)
    model = None
    if request.parametric:
        key = request.parametric.lower()
        if key not in PARAMETRIC:
            raise DomainError(f"Unknown parametric model: {request.parametric}",
                              {"known": sorted(PARAMETRIC)})
        model = PARAMETRIC[key]()
    g = request.grid
    grid = np.linspace(g.lo, g.hi, g.m) if g.m > 1 else np.array([g.lo])
    curve = profile_curve(data, psi, grid, request.gamma, model)
    points = [
        ProfilePoint(theta=t, gelr=v if np.isfinite(v) else None, parametric=p)
        for t, v, p in curve.rows()
    ]
    return ProfileResponse(points=points)
