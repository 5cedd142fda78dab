"""
Table output: CSV through pandas plus an aligned text rendering, both
carrying a provenance header.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple, Union

import pandas as pd

from crel.core.models import (
    BiasReport,
    CalibrationResult,
    CoverageResult,
    ScalingResult,
    VarianceStudyResult,
)

logger = logging.getLogger(__name__)

TableResult = Union[CoverageResult, VarianceStudyResult, ScalingResult,
                    Sequence[BiasReport], Sequence[CalibrationResult]]


def to_frame(result: TableResult) -> pd.DataFrame:
    """Long-format frame of any study result."""
    if isinstance(result, CoverageResult):
        return pd.DataFrame([c.model_dump() for c in result.cells])
    if isinstance(result, VarianceStudyResult):
        return pd.DataFrame([r.model_dump() for r in result.rows])
    if isinstance(result, ScalingResult):
        frame = pd.DataFrame([r.model_dump() for r in result.rows])
        return frame.dropna(axis=1, how="all")
    return pd.DataFrame([r.model_dump() for r in result]).dropna(axis=1, how="all")


def provenance(result: TableResult) -> Dict[str, Any]:
    """Seed, replication count, sample size and the gamma/psi lists of a result."""
    if isinstance(result, CoverageResult):
        return {"table": result.table, "statistic": result.statistic, "seed": result.seed,
                "M": result.M, "n": result.n, "gammas": result.gammas, "psis": result.psis,
                "failed_replications": result.failed_replications}
    if isinstance(result, VarianceStudyResult):
        return {"family": result.family, "alpha": result.alpha, "seed": result.seed,
                "M": result.M, "n": result.n, "gammas": [r.gamma for r in result.rows],
                "psis": ["mean"], "failures": result.failures}
    if isinstance(result, ScalingResult):
        return {"study": result.study, "seed": result.seed, "M": result.reps,
                "n": sorted({r.n for r in result.rows}), "slopes": result.slopes}
    rows = list(result)
    if rows and isinstance(rows[0], CalibrationResult):
        first = rows[0]
        return {"study": first.study, "seed": first.seed, "M": first.M, "n": first.n,
                "gammas": [r.gamma for r in rows], "psis": sorted({r.psi for r in rows})}
    return {"table": "2", "model": "laplace", "gammas": "all",
            "psis": sorted({r.psi for r in rows if r.psi})}


def table2_text(reports: Sequence[BiasReport]) -> str:
    """Coverage bias in units of 1e-2, alpha down the rows and psi across."""
    frame = pd.DataFrame([r.model_dump() for r in reports])
    wide = frame.pivot(index="alpha", columns="psi", values="bias_coverage") * 100.0
    return wide.to_string(float_format=lambda v: f"{v:8.2f}")


def render_text(result: TableResult) -> str:
    header = "\n".join(f"# {k} = {v}" for k, v in provenance(result).items())
    if not isinstance(result, (CoverageResult, VarianceStudyResult, ScalingResult)):
        rows = list(result)
        if rows and isinstance(rows[0], BiasReport):
            return header + "\n# units = 1e-2\n" + table2_text(rows) + "\n"
    body = to_frame(result).to_string(index=False, float_format=lambda v: f"{v:.6g}")
    return header + "\n" + body + "\n"


def write_table(result: TableResult, out_dir: Union[str, Path], stem: str) -> List[Path]:
    """
    Write ``<stem>.csv`` and ``<stem>.txt`` under ``out_dir``.

    Returns:
        Paths of the written files
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{stem}.csv"
    txt_path = out / f"{stem}.txt"
    to_frame(result).to_csv(csv_path, index=False, float_format="%.10g")
    txt_path.write_text(render_text(result), encoding="utf-8")
    logger.info(f"wrote {csv_path} and {txt_path}")
    return [csv_path, txt_path]


def failed_share(result: TableResult) -> float:
    """Share of table cells without a value."""
    if isinstance(result, CoverageResult):
        if not result.cells:
            return 0.0
        return sum(1 for c in result.cells if c.value is None) / len(result.cells)
    if isinstance(result, VarianceStudyResult):
        return result.failures / max(result.M, 1)
    return 0.0
