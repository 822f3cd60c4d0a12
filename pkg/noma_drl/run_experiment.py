"""
Entry Point for NOMA Channel-Assignment Experiments

Subcommands:
    train   train a policy, write metrics/validation CSVs and a checkpoint
    eval    compare a checkpoint with random assignment and exhaustive search
    oracle  exhaustive search on one instance
    jra     power allocation for explicit channel pairs
    sweep   train and evaluate across one experiment axis

CSV results go to stdout (or --out); logs go to stderr and the log file.
Exit codes: 0 success, 1 usage or configuration error, 2 no convergence,
3 oracle budget exceeded.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from noma_drl.config.run_config import SweepSpec, load_config
from noma_drl.exceptions import BudgetExceeded, ConfigParseError, ConfigValidationError, NomaDrlError
from noma_drl.main import EXIT_BUDGET, EXIT_OK, EXIT_USAGE, ExperimentHarness
from noma_drl.utils.logger import setup_logger
from noma_drl.utils.seeding import EVALUATION, derive_seeds

# Set up logging
logger = setup_logger("noma_drl")


class UsageError(Exception):
    """Invalid command line."""


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _parse_seeds(text: Optional[str], master_seed: int) -> Optional[List[int]]:
    # "3,7,11" lists seeds; a bare number is a count of derived evaluation seeds
    if not text:
        return None
    if "," in text:
        return [int(s) for s in text.split(",") if s.strip()]
    return derive_seeds(master_seed, EVALUATION, int(text))


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="noma_drl", description="NOMA channel assignment with policy-gradient training")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train a policy")
    train.add_argument("--config", help="key=value configuration file")
    train.add_argument("--seed", type=int, help="master seed (overrides the configuration)")
    train.add_argument("--out", help="output directory")
    train.add_argument("--wall-time", action="store_true", help="record wall-clock seconds in metrics")

    evaluate = sub.add_parser("eval", help="evaluate a checkpoint")
    evaluate.add_argument("--config")
    evaluate.add_argument("--model", required=True, help="checkpoint written by train")
    evaluate.add_argument("--seeds", help="comma-separated instance seeds, or a count of derived seeds")
    evaluate.add_argument("--seed", type=int)
    evaluate.add_argument("--out", help="CSV file (stdout if omitted)")
    evaluate.add_argument("--wall-time", action="store_true", help="report greedy inference time")

    oracle = sub.add_parser("oracle", help="exhaustive search on one instance")
    oracle.add_argument("--config")
    oracle.add_argument("--seed", type=int, help="instance seed")
    oracle.add_argument("--dump-instance", help="write the instance table to this CSV")
    oracle.add_argument("--out", help="CSV file (stdout if omitted)")

    jra = sub.add_parser("jra", help="power allocation for explicit channel pairs")
    jra.add_argument("--config")
    jra.add_argument("--pairs", required=True, help="CSV with gamma1,gamma2 columns, one row per channel")
    jra.add_argument("--p-t", type=float, help="total power in watts (overrides the configuration)")
    jra.add_argument("--out", help="CSV file (stdout if omitted)")

    sweep = sub.add_parser("sweep", help="sweep one experiment axis")
    sweep.add_argument("--config")
    sweep.add_argument("--axis", required=True)
    sweep.add_argument("--values", required=True, help="comma-separated axis values")
    sweep.add_argument("--repeats", type=int, default=1)
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--out", help="output directory")
    sweep.add_argument("--eval-seeds", type=int, default=4, help="held-out instances per run")

    return parser


def run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if getattr(args, "seed", None) is not None and args.command != "oracle":
        config = config.with_seed(args.seed)
    if getattr(args, "wall_time", False):
        config = config.with_wall_time()

    harness = ExperimentHarness(config)

    if args.command == "train":
        return harness.cmd_train(args.out)
    if args.command == "eval":
        return harness.cmd_eval(args.model, _parse_seeds(args.seeds, config.master_seed), args.out)
    if args.command == "oracle":
        return harness.cmd_oracle(args.seed, args.dump_instance, args.out)
    if args.command == "jra":
        return harness.cmd_jra(args.pairs, args.p_t, args.out)
    if args.command == "sweep":
        spec = SweepSpec(args.axis, tuple(v.strip() for v in args.values.split(",") if v.strip()), args.repeats)
        harness.cmd_sweep(spec, args.out, args.eval_seeds)
        return EXIT_OK
    raise UsageError(f"unknown command {args.command!r}")


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse the command line, run one subcommand and map errors to exit codes.

    Returns:
        Process exit code
    """
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        logger.error(f"✗ Usage error: {e}")
        return EXIT_USAGE

    try:
        logger.info("=" * 80)
        logger.info(f"NOMA-DRL STARTED ({args.command})")
        logger.info("=" * 80)
        code = run(args)
        logger.info("=" * 80)
        logger.info(f"NOMA-DRL COMPLETE ({args.command}), exit code {code}")
        logger.info("=" * 80)
        return code
    except BudgetExceeded as e:
        logger.error(f"✗ Oracle budget exceeded: {e}")
        return EXIT_BUDGET
    except (ConfigParseError, ConfigValidationError, UsageError, FileNotFoundError, ValueError) as e:
        logger.error(f"✗ Configuration error: {e}")
        return EXIT_USAGE
    except NomaDrlError as e:
        logger.error(f"✗ {type(e).__name__}: {e}", exc_info=True)
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"✗ Unexpected error: {e}", exc_info=True)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
