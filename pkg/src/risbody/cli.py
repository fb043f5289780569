"""Command-line entry point.

Exit codes: 0 success, 1 validation failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness
from .codes import CodeConstraintError
from .config import ConfigError, default_config, load_config
from .validation import run_validation_suite

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="risbody", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML experiment file (default: bundled setup)")
    common.add_argument("--seed", type=int, help="run a single seed instead of the configured list")
    common.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    common.add_argument("--regime", choices=("near", "far"), help="override the configured regime")
    common.add_argument("--parallel", type=int, default=1, metavar="K", help="worker processes")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("fraunhofer", parents=[common], help="Fraunhofer distance versus surface size")
    sub.add_parser("scenario1", parents=[common], help="orientation bounds, known positions")
    sub.add_parser("scenario2", parents=[common], help="position and orientation bounds")
    sub.add_parser("validate", parents=[common], help="run all oracle checks")
    return parser


def _load(args):
    config = load_config(args.config) if args.config else default_config()
    return config.with_overrides(seed=args.seed, regime=args.regime)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.parallel < 1:
            raise ConfigError("--parallel must be >= 1")
        config = _load(args)
        if args.command == "validate":
            report = run_validation_suite(config)
            for line in report.lines():
                print(line)
            print("validation passed" if report.passed else f"validation failed: {len(report.failures())} check(s)")
            return EXIT_OK if report.passed else EXIT_VALIDATION
        if args.command == "fraunhofer":
            result = harness.run_fraunhofer_curve(config)
        elif args.command == "scenario1":
            result = harness.run_scenario1_sweep(config, args.parallel)
        else:
            result = harness.run_scenario2_sweep(config, args.parallel)
        harness.write_outputs(result, config, args.out)
    except (ConfigError, CodeConstraintError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{result.experiment}: {len(result.rows)} rows written to {args.out / (result.experiment + '.csv')}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
