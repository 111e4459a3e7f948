"""
qmahg command-line entrypoint.

Settings resolve as: explicit flag, then --config file, then environment
(config.py), then defaults. Exit codes: 0 when every check passes, 1 for a
failing check or a hypothesis violation, 2 for malformed input.
"""
import argparse
import logging
import sys
import time
from typing import Dict, Optional, Sequence

from config import (
    DEFAULT_MODE,
    DEFAULT_N,
    DEFAULT_SEED,
    DEFAULT_TOL,
    LOG_LEVEL,
    MAX_N,
    RECORD_TIMINGS,
    VALID_MODES,
    load_config_file,
    validate_mode,
)
from qmahg.errors import ExpressionSyntaxError, HypothesisViolation, ValidationError
from qmahg.handlers.commands import COMMANDS
from qmahg.logging import configure_logging, level_from_name
from qmahg.models import RunSettings
from qmahg.services.reports import write_report
from qmahg.services.suites import SUITE_NAMES

logger = logging.getLogger("qmahg")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2


class ArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse reports usage errors by exiting; surface them as exceptions instead."""

    def error(self, message):
        raise ArgumentError(message)


def _add_domain_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--center", help="center point as 4n+1 comma-separated numbers (default: origin)")
    parser.add_argument("--box", type=float, default=1.0, help="half-width of the cube (default: 1)")
    parser.add_argument("--ball", type=float, help="use the gauge ball of this radius instead of the cube")


def _global_options() -> argparse.ArgumentParser:
    # unset flags stay absent, so they can be given before or after the subcommand
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--n", type=int, help=f"quaternionic dimension, 1..{MAX_N}")
    common.add_argument("--mode", choices=VALID_MODES, help="exact rational or floating-point coefficients")
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--report", help="write the JSON report to this path")
    common.add_argument("--config", help="key-value file with defaults for the flags above")
    common.add_argument("--log-level", dest="log_level")
    common.add_argument("--no-timings", dest="no_timings", action="store_true",
                        help="report elapsed_ms as 0 so reruns are byte-identical")
    common.add_argument("--points", type=int, help="grid points per axis")
    common.add_argument("--rule", choices=("midpoint", "trapezoid"))
    common.add_argument("--refine", type=int, help="refinement levels")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _global_options()
    parser = _Parser(prog="qmahg", parents=[common],
                     description="Quaternionic pluripotential calculus on the Heisenberg group.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=text, parents=[common])

    p = add("verify", "run an acceptance suite")
    p.add_argument("suite", choices=SUITE_NAMES + ("all",))
    p.add_argument("--samples", type=int, help="override the number of random samples per check")

    p = add("density", "det(Hess u) at a point")
    p.add_argument("--fn", required=True)
    p.add_argument("--point")

    p = add("psh", "sample Hess(u) >= 0 over a domain")
    p.add_argument("--fn", required=True)
    p.add_argument("--samples", type=int)
    _add_domain_args(p)

    p = add("fundamental", "the constant C_q of a line")
    p.add_argument("--q", required=True, help="4n comma-separated real components")

    p = add("integrate", "mass of (Delta u)^n over a domain")
    p.add_argument("--fn", required=True)
    p.add_argument("--refine-tol", dest="refine_tol", type=float, default=1e-3)
    _add_domain_args(p)

    p = add("cln", "Chern-Levine-Nirenberg ratio")
    p.add_argument("--fn", required=True, action="append")
    p.add_argument("--center")
    p.add_argument("--outer", type=float, default=1.0)
    p.add_argument("--inner", type=float, default=0.5)

    for name, text in (("compare", "comparison principle"), ("minprinciple", "minimum principle")):
        p = add(name, text)
        p.add_argument("--u", required=True)
        p.add_argument("--v", required=True)
        _add_domain_args(p)

    p = add("convergence", "convergence of Monge-Ampere measures")
    p.add_argument("--fn", required=True)
    p.add_argument("--chi")
    p.add_argument("--terms", type=int)
    _add_domain_args(p)

    p = add("export", "write the density grid as CSV")
    p.add_argument("--fn", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--level", type=int, default=0)
    _add_domain_args(p)
    return parser


def _pick(args: argparse.Namespace, file_settings: Dict, key: str, default):
    value = getattr(args, key, None)
    if value is not None:
        return value
    return file_settings.get(key, default)


def resolve_settings(args: argparse.Namespace, file_settings: Dict) -> RunSettings:
    """Fill unset flags from the config file, then from config.py."""
    for key in ("points", "rule", "refine"):
        setattr(args, key, _pick(args, file_settings, key, None))
    n = _pick(args, file_settings, "n", DEFAULT_N)
    if not 1 <= n <= MAX_N:
        raise ValidationError(f"n must lie in 1..{MAX_N}, got {n}")
    return RunSettings(
        n=n,
        mode=validate_mode(_pick(args, file_settings, "mode", DEFAULT_MODE)),
        seed=_pick(args, file_settings, "seed", DEFAULT_SEED),
        tol=_pick(args, file_settings, "tol", DEFAULT_TOL),
        report=_pick(args, file_settings, "report", None),
        record_timings=RECORD_TIMINGS and not getattr(args, "no_timings", False),
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        file_settings = load_config_file(getattr(args, "config", None))
        level = level_from_name(_pick(args, file_settings, "log_level", LOG_LEVEL))
    except (ArgumentError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    configure_logging(level)

    try:
        settings = resolve_settings(args, file_settings)
        logger.info(f"running '{args.command}' with n={settings.n}, mode={settings.mode}, seed={settings.seed}")
        started = time.perf_counter()
        report = COMMANDS[args.command](args, settings)
        if settings.record_timings:
            report.elapsed_ms = round((time.perf_counter() - started) * 1000.0, 3)
        if settings.report:
            write_report(report, settings.report)
    except ExpressionSyntaxError as e:
        logger.error(f"Syntax error in expression: {e}", exc_info=True)
        print(f"error: {e}\n  {e.text}\n  {' ' * max(e.column - 1, 0)}^", file=sys.stderr)
        return EXIT_INVALID
    except HypothesisViolation as e:
        logger.error(f"Hypothesis violation: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILED
    except ValueError as e:
        logger.error(f"Invalid input: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID

    if not report.passed:
        failed = sum(not c.passed for c in report.checks)
        logger.warning(f"{failed} of {len(report.checks)} checks failed")
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
