"""
kaczeros command line
Expected real zeros of random polynomials with fractional Gaussian noise coefficients

Usage:
    python app.py expected --hurst 0.3 --n 16 64 256 --out results/e.csv
    python app.py simulate --limit-zero --n 128 --trials 10000 --workers 8
    python app.py run --config experiment.json --seed 7

Exit codes: 0 success, 2 configuration error, 3 numerical non-convergence.
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

from dotenv import load_dotenv
from pydantic import ValidationError

from src.experiments import asymptotics_ell_table, run_experiment
from src.models import ExperimentConfig, ExperimentMode, ModelKind, OutputFormat, RegionSpec, RowStatus, SamplingMethod
from src.moments import NumericalInvariantError, QuadratureBudgetError
from src.storage_helper import default_output_path, ell_table_path, save_ell_table, save_records

load_dotenv()

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGED = 3

SUBCOMMANDS = {
    "expected": ExperimentMode.EXPECTED,
    "simulate": ExperimentMode.SIMULATE,
    "asymptotics": ExperimentMode.ASYMPTOTICS,
    "compare": ExperimentMode.COMPARE,
}


class ConfigError(ValueError):
    """Invalid config file or flag combination."""
    pass


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON experiment config; flags override its fields")
    model = parser.add_mutually_exclusive_group()
    model.add_argument("--hurst", type=float, help="Hurst index H in (0, 1)")
    model.add_argument("--limit-zero", action="store_true", help="Use the H=0 limit coefficient law")
    parser.add_argument("--n", type=int, nargs="+", dest="n_values", help="Polynomial lengths, ascending")
    parser.add_argument("--trials", type=int, help="Monte Carlo trials per n")
    parser.add_argument("--seed", type=int, help="Experiment seed")
    parser.add_argument("--tol", type=float, help="Absolute quadrature tolerance")
    parser.add_argument("--region", choices=[r.value for r in RegionSpec], help="Integration region")
    parser.add_argument("--out", dest="output_path", help="Output file")
    parser.add_argument("--format", dest="output_format", choices=[f.value for f in OutputFormat], type=str.upper)
    parser.add_argument("--workers", type=int, help="Worker threads (default: KACZEROS_WORKERS)")
    parser.add_argument("--method", dest="sampling_method", choices=[m.value for m in SamplingMethod])
    parser.add_argument("--ell-points", type=float, nargs="+", help="Points at which to tabulate ell (asymptotics)")
    parser.add_argument("--boundary-correction", action="store_true", default=None,
                        help="Include the H=0 boundary-layer mass in asymptotic positive-axis rows")
    parser.add_argument("--no-cross-check", dest="cross_check", action="store_false", default=None,
                        help="Skip the sign-grid audit of root counts")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kaczeros", description=__doc__.splitlines()[2])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, mode in SUBCOMMANDS.items():
        _add_common_flags(sub.add_parser(name, help=f"Run in {mode.value} mode"))
    run = sub.add_parser("run", help="Run the mode named by --mode or by the config")
    run.add_argument("--mode", choices=[m.value for m in ExperimentMode])
    _add_common_flags(run)
    return parser


def _load_config_file(path: Path) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    if not isinstance(document, dict):
        raise ConfigError(f"Config {path} must be a JSON object")
    return document


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """Config file fields, then flag overrides, validated as one ExperimentConfig."""
    fields: Dict[str, Any] = _load_config_file(args.config) if args.config else {}

    if args.command in SUBCOMMANDS:
        fields["mode"] = SUBCOMMANDS[args.command].value
    elif args.mode:
        fields["mode"] = args.mode
    if "mode" not in fields:
        raise ConfigError("No mode given: use a subcommand, --mode, or a config 'mode' field")

    if args.hurst is not None:
        fields["model"] = {"kind": ModelKind.FRACTIONAL_INCREMENT.value, "h": args.hurst}
    elif args.limit_zero:
        fields["model"] = {"kind": ModelKind.LIMIT_ZERO.value}

    for name in ("n_values", "trials", "seed", "tol", "region", "output_path", "output_format",
                 "workers", "sampling_method", "ell_points", "boundary_correction", "cross_check"):
        value = getattr(args, name, None)
        if value is not None:
            fields[name] = value

    try:
        return ExperimentConfig.model_validate(fields)
    except ValidationError as e:
        raise ConfigError(str(e)) from e


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = build_config(args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG

    try:
        records = run_experiment(config)
        ell_samples = asymptotics_ell_table(config) if config.mode == ExperimentMode.ASYMPTOTICS else []
    except (QuadratureBudgetError, NumericalInvariantError) as e:
        logger.error(f"Numerical failure: {e}", exc_info=True)
        return EXIT_NONCONVERGED
    except ValueError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG

    path = Path(config.output_path) if config.output_path else default_output_path(config)
    save_records(records, path, config.output_format, config)
    if ell_samples:
        save_ell_table(ell_samples, ell_table_path(path))

    failed = [r for r in records if r.status == RowStatus.NONCONVERGED]
    if failed:
        logger.error(f"{len(failed)} of {len(records)} rows did not converge")
        return EXIT_NONCONVERGED
    return EXIT_OK


def _configure_logging() -> None:
    level = os.getenv("KACZEROS_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO))


if __name__ == "__main__":
    _configure_logging()
    sys.exit(main())
