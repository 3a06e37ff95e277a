import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from omegaconf.errors import OmegaConfBaseException
from pydantic import ValidationError

from paramodular_verify.config import Config, ReportFormat, SuiteName
from paramodular_verify.dependencies import load_config
from paramodular_verify.exceptions import ParamodularError
from paramodular_verify.formatters import emit_report
from paramodular_verify.logger import setup_logger
from paramodular_verify.suites import (
    Case,
    build_cases,
    diff_point_cases,
    eisenstein_point_cases,
    epstein_point_cases,
    fe_point_cases,
    group_cases,
    run_cases,
    series_point_cases,
    smartsum_point_cases,
)


logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2

# argparse destinations and the flat config keys they override
FLAG_KEYS = {
    "p": "p",
    "N": "N",
    "kappa": "kappa",
    "chi_index": "chi_index",
    "Z": "Z",
    "s": "s",
    "radius": "radius",
    "precision_bits": "precision_bits",
    "format": "format",
    "log_level": "log_level",
    "suite": "suite",
    "q": "q",
    "r": "r",
    "representation": "representation",
    "height_bound": "height_bound",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="Flat key/value YAML file; flags override its values.")
    common.add_argument("--p", type=int, help="Prime p.")
    common.add_argument("--N", type=int, help="Level N, coprime to p.")
    common.add_argument("--kappa", type=int, help="Divisor kappa of N.")
    common.add_argument("--chi-index", type=int, dest="chi_index", help="Character mod N by canonical index.")
    common.add_argument("--Z", type=str, help='Point "x11 x12 x22 y11 y12 y22" (default iI).')
    common.add_argument("--s", type=str, help='Complex variable "re im".')
    common.add_argument("--radius", type=float, help="Truncation radius of direct lattice sums.")
    common.add_argument("--precision-bits", type=int, dest="precision_bits", help="Working precision (>= 53).")
    common.add_argument("--format", choices=[f.value for f in ReportFormat], help="Report format (default json).")
    common.add_argument("--out", type=Path, help="Write the report here instead of stdout.")
    common.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING, ERROR or CRITICAL.")

    parser = argparse.ArgumentParser(
        prog="paramodular-verify",
        description="Numerical and exact verification of the paramodular Eisenstein series identities.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    suite = commands.add_parser("suite", parents=[common], help="Run a named acceptance suite.")
    suite.add_argument("--suite", choices=[n.value for n in SuiteName], help="Suite name (default all).")

    commands.add_parser("group", parents=[common], help="Group algebra checks for one (p, N).")
    commands.add_parser("epstein", parents=[common], help="Epstein function of P_Z at s.")

    eisenstein = commands.add_parser("eisenstein", parents=[common], help="Representation coherence of EE at (Z, s).")
    eisenstein.add_argument("--representation", choices=["lattice", "second", "third", "coset"])
    eisenstein.add_argument("--height-bound", type=int, dest="height_bound", help="Coset truncation height.")

    commands.add_parser("fe", parents=[common], help="Functional equation of EE at (Z, s).")
    commands.add_parser("smartsum", parents=[common], help="Smart-sum identity at (Z, s).")

    diff = commands.add_parser("diff", parents=[common], help="Difference series checks at (Z, s).")
    diff.add_argument("--q", type=int, help="Prime q.")
    diff.add_argument("--r", type=int, help="Positive integer r.")

    series = commands.add_parser("series", parents=[common], help="Dirichlet series and prefactor algebra.")
    series.add_argument("--coefficients", type=Path, help='Coefficient file with lines "m re im".')
    series.add_argument("--weight", type=int, default=10, help="Weight k of the coefficient data.")
    series.add_argument("--growth-exponent", type=float, default=0.0, dest="growth_exponent")
    series.add_argument("--cutoff", type=int, help="Number of coefficients summed.")
    return parser


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    return {key: getattr(args, dest) for dest, key in FLAG_KEYS.items() if getattr(args, dest, None) is not None}


def _cases(args: argparse.Namespace, config: Config) -> tuple[str, list[Case]]:
    command = args.command
    if command == "suite":
        return config.suite.value, build_cases(config.suite, config)
    if command == "group":
        return command, group_cases(config, pairs=[(config.group.p, config.group.N)], levels=[config.group.N])
    if command == "epstein":
        return command, epstein_point_cases(config)
    if command == "eisenstein":
        return command, eisenstein_point_cases(config)
    if command == "fe":
        return command, fe_point_cases(config)
    if command == "smartsum":
        return command, smartsum_point_cases(config)
    if command == "diff":
        return command, diff_point_cases(config)
    return command, series_point_cases(config, args.coefficients, args.weight, args.growth_exponent, args.cutoff)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, _overrides(args))
    except (ValidationError, ValueError, OSError, OmegaConfBaseException) as e:
        print(f"paramodular-verify: invalid configuration: {e}", file=sys.stderr)
        return EXIT_USAGE

    setup_logger(config.log_level)
    logger.debug(f"Config: {config}")

    try:
        suite, cases = _cases(args, config)
    except (ValidationError, ParamodularError, ValueError, OSError) as e:
        logger.error(f"Invalid parameters: {e}")
        return EXIT_USAGE

    report = run_cases(suite, cases, config)
    text = emit_report(report, config.output_format)
    if args.out is not None:
        args.out.write_text(text)
        logger.info(f"Report written to {args.out}")
    else:
        sys.stdout.write(text)
    return report.exit_code()


if __name__ == "__main__":
    sys.exit(main())
