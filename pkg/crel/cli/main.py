"""
Command-line entry point.

Exit statuses: 0 success, 1 other failure (including more than 10% failed
table cells), 2 convex hull infeasible, 3 sampler failure, 64 usage or parse
error.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from crel import __version__
from crel.core.audit import RunLogger, setup_logging
from crel.core.config import LOG_DIR, MAX_FAILED_CELL_SHARE, settings
from crel.core.exceptions import CrelException, UsageError
from crel.core.models import ErrorCode
from crel.core.streams import resolve_seed
from crel.experiments.studies import TABLES
from . import commands
from .config_file import build_run_config, read_config_file
from .manifest import snapshot, write_manifest, written_since

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1


class CrelArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting with status 2."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value (or YAML) config file")
    p.add_argument("--out", help="Output directory (default: CREL_OUTPUT_DIR)")
    p.add_argument("--threads", type=int, help="Worker processes for replications")
    p.add_argument("--seed", type=int, help="Master seed (default: config, CREL_SEED, 0)")
    p.add_argument("--log-level", default=None, help="Console log level")


def _data_args(p: argparse.ArgumentParser, theta: bool = True) -> None:
    p.add_argument("data", nargs="?", help="CSV data file")
    p.add_argument("--psi", help="mean, median, huber[:c], tukey[:k], glm, glm_robust[:c], score:<model>")
    p.add_argument("--gamma", type=float, help="Cressie-Read index")
    if theta:
        p.add_argument("--theta", type=_float_list, help="Parameter value, comma separated")


def build_parser() -> CrelArgumentParser:
    parser = CrelArgumentParser(prog="crel", description="Bayesian Cressie-Read empirical likelihood")
    parser.add_argument("--version", action="version", version=f"crel {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=CrelArgumentParser)

    p = sub.add_parser("weights", help="Cressie-Read weights at theta")
    _data_args(p)
    _common(p)

    p = sub.add_parser("gelr", help="GELR statistic at theta")
    _data_args(p)
    _common(p)

    p = sub.add_parser("profile", help="GELR curve over a grid")
    _data_args(p, theta=False)
    p.add_argument("--grid", help="lo:hi:m")
    p.add_argument("--parametric", choices=sorted(commands.PARAMETRIC), help="Parametric overlay")
    _common(p)

    p = sub.add_parser("posterior", help="Posterior quantiles by Metropolis sampling")
    _data_args(p, theta=False)
    p.add_argument("--prior", help="flat | normal:mean,sd")
    p.add_argument("--alpha", type=_float_list, help="Quantile levels, comma separated")
    p.add_argument("--component", type=int, help="Zero-based parameter index")
    p.add_argument("--chain-length", dest="chain_length", type=int)
    p.add_argument("--burn-in", dest="burn_in", type=int)
    p.add_argument("--thin", type=int)
    p.add_argument("--no-adapt", dest="adapt", action="store_const", const=False)
    p.add_argument("--proposal-scale", dest="proposal_scale", type=_float_list)
    p.add_argument("--chain", action="store_const", const=True, help="Also write chain.csv")
    _common(p)

    p = sub.add_parser("reproduce", help="Reproduce a table or study")
    p.add_argument("--table", choices=list(TABLES))
    p.add_argument("--scale", choices=["desk", "paper"])
    p.add_argument("--reference", choices=["contaminated", "clean"],
                   help="Reference posterior data for the Poisson regression table")
    _common(p)

    p = sub.add_parser("serve", help="Start the HTTP service")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--log-level", default=None)
    return parser


def _serve(args) -> int:
    import uvicorn

    uvicorn.run("crel.api.main:app", host=args.host or settings.SERVER_HOST,
                port=args.port or settings.SERVER_PORT, log_level=(args.log_level or "info").lower())
    return EXIT_OK


def run(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run one subcommand and write its manifest.

    Raises:
        CrelException: On any library or usage error
    """
    args = build_parser().parse_args(argv)
    if args.command is None:
        raise UsageError("a subcommand is required", {"commands": ["weights", "gelr", "profile",
                                                                   "posterior", "reproduce", "serve"]})
    setup_logging(str(LOG_DIR), args.log_level or settings.LOG_LEVEL)
    if args.command == "serve":
        return _serve(args)

    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "log_level")}
    file_values = read_config_file(args.config) if args.config else None
    cfg = build_run_config(file_values, flags)
    seed = resolve_seed(cfg.seed)
    out = Path(cfg.out) if cfg.out else settings.OUTPUT_DIR
    out.mkdir(parents=True, exist_ok=True)
    RunLogger.log_run_started(args.command, seed, cfg.model_dump(mode="json"))

    before = snapshot(out)
    status = EXIT_OK
    paths: List[Path] = []
    error: Optional[str] = None
    try:
        if args.command == "weights":
            paths = commands.cmd_weights(cfg, out)
        elif args.command == "gelr":
            paths = commands.cmd_gelr(cfg, out)
        elif args.command == "profile":
            paths = commands.cmd_profile(cfg, out)
        elif args.command == "posterior":
            paths = commands.cmd_posterior(cfg, out, seed)
        else:
            paths, share = commands.cmd_reproduce(cfg, out, seed)
            if share > MAX_FAILED_CELL_SHARE:
                logger.error(f"{share:.1%} of table cells failed")
                status = EXIT_FAILED
    except BaseException as e:
        error = e.code.value if isinstance(e, CrelException) else ErrorCode.INTERNAL_ERROR.value
        paths = written_since(out, before)
        raise
    finally:
        write_manifest(out, args.command, cfg, seed, paths, error)
    return status


def main(argv: Optional[List[str]] = None) -> int:
    """Run the command line and map errors to exit statuses."""
    try:
        return run(argv)
    except CrelException as e:
        print(f"error: {e.code.value}: {e.message}", file=sys.stderr)
        if e.details:
            print(f"details: {e.details}", file=sys.stderr)
        logger.error(f"{e.code.value}: {e.message}")
        return e.exit_code
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
