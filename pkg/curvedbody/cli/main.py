"""
Command-line entry point.

    curvedbody simulate --config sphere_gyro.yaml --out runs/
    curvedbody actions --config sphere_geodetic.yaml
    curvedbody verify --suite poisson --chart sphere2
    curvedbody bertrand --config pseudosphere_oscillator.yaml --chart pseudosphere2
"""

import argparse
import logging
from pathlib import Path
from typing import List, Optional

from ..errors import CurvedBodyError, ParseError, ToleranceBreach, ValidationError
from ..log import configure_logging
from .config import parse_config
from .runner import COMMANDS, SUITES, run

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_RUNTIME = 4
EXIT_TOLERANCE = 5


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curvedbody",
        description="Gyroscopic and affine bodies on curved manifolds: simulation, spectra and verification.",
    )
    parser.add_argument("--log-level", choices=["error", "warn", "info", "debug"], default=None,
                        help="Log level (default: $CURVEDBODY_LOG or warn)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", type=Path, required=name != "verify", help="Scenario YAML file")
        cmd.add_argument("--out", type=Path, default=None, help="Output directory (default: outputs.directory)")
        cmd.add_argument("--seed", type=int, default=None, help="Random seed for sampling suites")
        cmd.add_argument("--threads", type=int, default=None, help="Worker threads (default: all cores)")
        if name == "actions":
            cmd.add_argument("--allow-unbounded", action="store_true",
                             help="Report infinite actions for open internal stages")
        if name in ("verify", "bertrand"):
            cmd.add_argument("--chart", default=None, help="Chart name (verify also takes flat3_torsion)")
        if name == "verify":
            cmd.add_argument("--suite", choices=SUITES, default="all")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run one command and map the outcome to an exit code.

    Returns:
        int: 0 on success, 2 parse error, 3 validation error, 4 runtime failure,
            5 tolerance breach or failed report
    """
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        spec = parse_config(args.config) if args.config is not None else None
        default_out = spec.section("outputs").get("directory", "runs") if spec is not None else "runs"
        report = run(
            args.command, spec, args.out or Path(default_out),
            allow_unbounded=getattr(args, "allow_unbounded", False),
            suite=getattr(args, "suite", "all"),
            chart=getattr(args, "chart", None),
            seed=args.seed,
            threads=args.threads,
        )
    except ParseError as exc:
        logger.error("%s", exc)
        return EXIT_PARSE
    except ValidationError as exc:
        for name, reason in exc.problems:
            logger.error("%s: %s", name, reason)
        return EXIT_VALIDATION
    except ToleranceBreach as exc:
        logger.error("%s", exc)
        return EXIT_TOLERANCE
    except (CurvedBodyError, OSError) as exc:
        logger.error("%s", exc)
        return EXIT_RUNTIME
    if report.status == "fail":
        logger.error("tolerances not met: %s", ", ".join(report.failed_checks()))
        return EXIT_TOLERANCE
    return EXIT_OK
