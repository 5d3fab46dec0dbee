#!/usr/bin/env python3
"""
Command-line driver for the rate-bound toolkit.

    python bounds_cli.py sweep configs/reference_curves.env
    python bounds_cli.py validate configs/validation_desk.env
    python bounds_cli.py tradeoff --np 25 --snr-db 0 --efa 1e-4
"""

import argparse
import logging
import sys
from dataclasses import replace

from src.bounds.preamble import detection_tradeoff
from src.config.sweep_config import load_sweep_config, load_validation_config
from src.sweep.runner import run_sweep, run_validation
from src.utils.errors import ConfigError, DomainError, OutputError, PrecisionError
from src.utils.helpers import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PRECISION = 3
EXIT_OUTPUT = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Finite-blocklength bounds with packet detection")
    parser.add_argument("--log-level", default="INFO", help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--quiet", action="store_true", help="Hide progress bars")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="Compute a rate curve from a config file")
    sweep.add_argument("config")
    sweep.add_argument("--seed", type=int, help="Override MASTER_SEED")
    sweep.add_argument("--out", help="Override OUTPUT")
    sweep.add_argument("--threads", type=int, help="Override THREADS")

    validate = sub.add_parser("validate", help="Check the joint bound with the brute-force decoder")
    validate.add_argument("config")
    validate.add_argument("--seed", type=int, help="Override MASTER_SEED")
    validate.add_argument("--out", help="Override OUTPUT")
    validate.add_argument("--threads", type=int, help="Worker threads for LLR sampling")

    tradeoff = sub.add_parser("tradeoff", help="Print the preamble FA/MD operating point")
    tradeoff.add_argument("--np", dest="n_p", type=int, required=True)
    tradeoff.add_argument("--snr-db", type=float, required=True)
    tradeoff.add_argument("--efa", type=float, required=True)
    return parser


def _sweep(args) -> int:
    config = load_sweep_config(args.config)
    if args.seed is not None:
        config = replace(config, master_seed=args.seed)
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("must be positive", field="--threads")
        config = replace(config, threads=args.threads)
    path, curve = run_sweep(config, output=args.out, show_progress=not args.quiet)
    print(f"wrote {len(curve)} rows to {path}")
    return EXIT_OK


def _validate(args) -> int:
    config = load_validation_config(args.config)
    if args.seed is not None:
        config = replace(config, master_seed=args.seed)
    if args.threads is not None and args.threads < 1:
        raise ConfigError("must be positive", field="--threads")
    path, report = run_validation(config, threads=args.threads, output=args.out,
                                  show_progress=not args.quiet)
    print(report.to_text(), end="")
    print(f"report: {path}")
    return EXIT_OK


def _tradeoff(args) -> int:
    rho = 10.0 ** (args.snr_db / 10.0)
    try:
        result = detection_tradeoff(args.n_p, rho, args.efa)
    except DomainError as e:
        raise ConfigError(str(e)) from e
    print(f"n_p: {args.n_p}")
    print(f"snr_db: {args.snr_db:.10g}")
    print(f"gamma: {result.gamma:.10g}")
    print(f"eps_fa: {result.efa:.10g}")
    print(f"eps_md: {result.emd:.10g}")
    if result.degenerate:
        print("flags: DEGENERATE")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    handlers = {"sweep": _sweep, "validate": _validate, "tradeoff": _tradeoff}
    try:
        return handlers[args.command](args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except PrecisionError as e:
        logger.error(f"Insufficient Monte-Carlo precision: {e}")
        return EXIT_PRECISION
    except (OutputError, OSError) as e:
        logger.error(f"Output error: {e}")
        return EXIT_OUTPUT


if __name__ == "__main__":
    sys.exit(main())
