"""
Named reproductions at two scales.

``desk`` keeps the sample sizes and replication counts needed for the
qualitative patterns with shorter chains (Table 3 uses M=40); ``paper``
uses the full replication counts and chain lengths.
"""

import logging
from pathlib import Path
from typing import Dict, List, Tuple, Union

from crel.core.exceptions import DomainError
from crel.core.models import PosteriorConfig
from crel.estimating.registry import psi_from_name
from .coverage import coverage_simulation, validity_study, wilks_calibration
from .efficiency import bias_table
from .glm_study import glm_accuracy_simulation
from .tables import TableResult, failed_share, write_table
from .variance_study import expansion_order_study, theorem4_cancellation, theorem5_variance_study

logger = logging.getLogger(__name__)

TABLES = ("1", "2", "3", "thm5", "thm4", "wilks", "validity", "expansion")

SCALES: Dict[str, Dict[str, int]] = {
    "desk": {"chain_length": 10000, "burn_in": 1000, "table1_M": 80, "table3_M": 40,
             "thm5_M": 500, "thm4_M": 200, "wilks_M": 2000, "validity_M": 500,
             "expansion_reps": 200},
    "paper": {"chain_length": 50000, "burn_in": 5000, "table1_M": 80, "table3_M": 120,
              "thm5_M": 2000, "thm4_M": 500, "wilks_M": 5000, "validity_M": 2000,
              "expansion_reps": 500},
}

STEMS = {"1": "table1", "2": "table2", "3": "table3", "thm5": "theorem5", "thm4": "theorem4",
         "wilks": "wilks", "validity": "validity", "expansion": "expansion_order"}


def run_study(table: str, scale: str = "desk", seed: int = 0, threads: int = 1,
              reference: str = "contaminated") -> TableResult:
    """
    Compute one named table.

    Raises:
        DomainError: If the table or scale is unknown
    """
    if table not in TABLES:
        raise DomainError(f"Unknown table: {table}", {"known": list(TABLES)})
    if scale not in SCALES:
        raise DomainError(f"Unknown scale: {scale}", {"known": list(SCALES)})
    s = SCALES[scale]
    config = PosteriorConfig(chain_length=s["chain_length"], burn_in=s["burn_in"], seed=seed)
    logger.info(f"reproducing {table} at {scale} scale, seed={seed}")
    if table == "1":
        return coverage_simulation(M=s["table1_M"], seed=seed, config=config, threads=threads)
    if table == "2":
        return bias_table([psi_from_name(p) for p in ("mean", "median", "huber", "tukey")])
    if table == "3":
        return glm_accuracy_simulation(M=s["table3_M"], seed=seed, config=config,
                                       reference=reference, threads=threads)
    if table == "thm5":
        return theorem5_variance_study(M=s["thm5_M"], seed=seed, threads=threads)
    if table == "thm4":
        return theorem4_cancellation(M=s["thm4_M"], seed=seed, threads=threads)
    if table == "wilks":
        return wilks_calibration(M=s["wilks_M"], seed=seed, threads=threads)
    if table == "validity":
        return [validity_study(M=s["validity_M"], seed=seed, threads=threads)]
    return expansion_order_study(reps=s["expansion_reps"], seed=seed, threads=threads)


def reproduce_table(table: str, scale: str = "desk", seed: int = 0, threads: int = 1,
                    out: Union[str, Path] = "./out",
                    reference: str = "contaminated") -> Tuple[TableResult, List[Path], float]:
    """
    Compute a table and write it as CSV and text.

    Returns:
        (result, written paths, share of failed cells)
    """
    result = run_study(table, scale, seed, threads, reference)
    paths = write_table(result, out, STEMS[table])
    share = failed_share(result)
    if share > 0:
        logger.warning(f"table {table}: {share:.1%} of cells failed")
    return result, paths, share
