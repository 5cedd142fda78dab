"""
Replication runner: independent tasks in worker processes, ordered results.
"""

import logging
import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, List, Optional, Sequence, Tuple

from crel.core.audit import RunLogger
from crel.core.exceptions import CrelException

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Outcome:
    index: int
    value: Any = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _call(args: Tuple[Callable, int, Any]) -> Outcome:
    task, index, payload = args
    try:
        return Outcome(index=index, value=task(index, payload))
    except CrelException as e:
        return Outcome(index=index, error=f"{e.code.value}: {e.message}")
    except (ArithmeticError, ValueError, FloatingPointError) as e:
        return Outcome(index=index, error=f"{type(e).__name__}: {e}")


def run_replications(task: Callable[[int, Any], Any], payloads: Sequence[Any],
                     threads: int = 1, study: str = "study") -> List[Outcome]:
    """
    Run ``task(index, payload)`` for every payload.

    ``task`` must be a module-level function so it can be sent to worker
    processes. Failed replications come back with ``error`` set and are
    logged; the list is sorted by index whatever the completion order.

    Args:
        task: Replication function
        payloads: One picklable payload per replication
        threads: Worker processes; 1 runs in the calling process
        study: Name used in run events

    Returns:
        Outcomes sorted by replication index
    """
    args = [(task, i, p) for i, p in enumerate(payloads)]
    threads = max(1, int(threads))
    if threads > 1 and len(args) > 1:
        logger.info(f"{study}: {len(args)} replications on {threads} workers")
        ctx = mp.get_context("spawn")
        with ProcessPoolExecutor(max_workers=threads, mp_context=ctx) as pool:
            outcomes = list(pool.map(_call, args))
    else:
        logger.info(f"{study}: {len(args)} replications sequentially")
        outcomes = [_call(a) for a in args]
    outcomes.sort(key=lambda o: o.index)
    for o in outcomes:
        if not o.ok:
            RunLogger.log_replication_failed(study, o.index, o.error)
    return outcomes
