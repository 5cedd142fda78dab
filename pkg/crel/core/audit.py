"""
Logging and run-event recording.
"""

import logging
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Dict, Any, List


def setup_logging(log_dir: str = "./logs", level: str = "INFO") -> None:
    """
    Set up logging with console, file and run-event handlers.

    Args:
        log_dir: Directory for log files
        level: Console log level name
    """
    log_path = Path(log_dir)
    log_path.mkdir(parents=True, exist_ok=True)

    logger = logging.getLogger()
    logger.setLevel(logging.DEBUG)
    for handler in list(logger.handlers):
        if getattr(handler, "_crel", False):
            logger.removeHandler(handler)

    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    console_handler = logging.StreamHandler()
    console_handler.setLevel(getattr(logging, level.upper(), logging.INFO))
    console_handler.setFormatter(formatter)
    console_handler._crel = True
    logger.addHandler(console_handler)

    file_handler = logging.FileHandler(log_path / "crel.log")
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(formatter)
    file_handler._crel = True
    logger.addHandler(file_handler)

    run_handler = logging.FileHandler(log_path / "runs.log")
    run_handler.setLevel(logging.INFO)
    run_handler.setFormatter(logging.Formatter('%(asctime)s - RUN - %(message)s'))
    run_handler._crel = True

    run_logger = logging.getLogger("run")
    for handler in list(run_logger.handlers):
        if getattr(handler, "_crel", False):
            run_logger.removeHandler(handler)
    run_logger.addHandler(run_handler)
    run_logger.setLevel(logging.INFO)


class RunLogger:
    """Structured JSON events describing runs, failures and artifacts."""

    _logger = logging.getLogger("run")

    @classmethod
    def _emit(cls, event: Dict[str, Any], level: int = logging.INFO) -> None:
        event["timestamp"] = datetime.now(timezone.utc).isoformat()
        cls._logger.log(level, json.dumps(event, default=str))

    @classmethod
    def log_run_started(cls, command: str, seed: int, config: Dict[str, Any]) -> None:
        """
        Log the start of a command.

        Args:
            command: Subcommand or study name
            seed: Master seed
            config: Resolved configuration
        """
        cls._emit({"event": "run_started", "command": command, "seed": seed, "config": config})

    @classmethod
    def log_solver_failure(cls, where: str, gamma: float, error: str,
                           details: Optional[Dict[str, Any]] = None) -> None:
        """
        Log an inner solve that did not converge.

        Args:
            where: Calling operation
            gamma: Cressie-Read index
            error: Error message
            details: Residual and iteration information
        """
        cls._emit({"event": "solver_failure", "where": where, "gamma": gamma,
                   "error": error, "details": details}, logging.WARNING)

    @classmethod
    def log_replication_failed(cls, study: str, replication: int, error: str) -> None:
        """
        Log a replication excluded from a study.

        Args:
            study: Study name
            replication: Replication index
            error: Error message
        """
        cls._emit({"event": "replication_failed", "study": study,
                   "replication": replication, "error": error}, logging.WARNING)

    @classmethod
    def log_cell_completed(cls, study: str, cell: Dict[str, Any]) -> None:
        cls._emit({"event": "cell_completed", "study": study, "cell": cell})

    @classmethod
    def log_manifest_written(cls, path: str, artifacts: List[str]) -> None:
        cls._emit({"event": "manifest_written", "path": path, "artifacts": artifacts})
