"""
Analytic table endpoint.
"""

from fastapi import APIRouter

from crel.experiments.studies import run_study

router = APIRouter(prefix="/tables", tags=["tables"])


@router.get("/2")
def table2_endpoint():
    """Coverage bias of empirical posterior quantiles at the Laplace model."""
    reports = run_study("2")
    return {"model": "laplace", "rows": [r.model_dump() for r in reports]}
