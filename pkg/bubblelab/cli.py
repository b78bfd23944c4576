import argparse
import asyncio
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

from bubblelab.core.errors import FatalError, NumericalError
from bubblelab.experiments.config import load_config
from bubblelab.experiments.registry import EXPERIMENT_REGISTRY, ExperimentFactory, run_experiment
from bubblelab.runner import run_batch

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def setup_logging(log_file="logs/bubblelab.log"):
    log_dir = os.path.dirname(log_file)
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)

    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        handlers=[
            logging.FileHandler(log_file, mode="a"),
            logging.StreamHandler(),
        ],
    )

    return logging.getLogger("bubblelab")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bubblelab",
        description="Numerical checks for the refined two-bubble ansatz of k-equivariant wave maps.",
    )
    parser.add_argument("experiment", help=f"experiment id, 'all' or 'list' ({', '.join(ExperimentFactory.list())})")
    parser.add_argument("--config", type=Path, help="TOML or JSON config file")
    parser.add_argument("--k", type=int, help="equivariance class, k >= 4")
    parser.add_argument("--out", type=Path, help="output root (default: $BUBBLELAB_OUT or out/)")
    parser.add_argument("--seed", type=int, help="seed of the randomized batteries")
    parser.add_argument("--workers", type=int, help="worker processes for 'all'")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    return {"k": args.k, "out_dir": args.out, "seed": args.seed}


def _list() -> int:
    for experiment_id, cls in EXPERIMENT_REGISTRY.items():
        schema = ExperimentFactory.get_schema(experiment_id)
        params = ", ".join(f"{f['name']}={f.get('default')!r}" for f in schema["fields"])
        print(f"{experiment_id:22s} {cls().description()}")
        print(f"{'':22s} params: {params}")
    return EXIT_PASS


def _run_one(args: argparse.Namespace, logger: logging.Logger) -> int:
    config = load_config(args.experiment, args.config, _overrides(args))
    result = run_experiment(args.experiment, config)
    if result.error is not None:
        return EXIT_USAGE if isinstance(result.error, FatalError) else EXIT_NUMERICAL
    for claim in result.report.failed_claims():
        logger.warning(f"FAILED {claim.name}: measured {claim.measured:.6g} vs {claim.reference}")
    return EXIT_PASS if result.passed else EXIT_FAIL


def _run_all(args: argparse.Namespace, logger: logging.Logger) -> int:
    configs = [load_config(i, args.config, _overrides(args)) for i in ExperimentFactory.list()]
    responses = asyncio.run(run_batch(configs, args.workers))
    code = EXIT_PASS
    for r in responses:
        status = "pass" if r.passed else ("error" if r.error else "FAIL")
        logger.info(f"{r.experiment_id:22s} {status:5s} {r.runtime:8.1f}s {r.error or ''}")
        if r.error is not None:
            code = max(code, EXIT_NUMERICAL)
        elif not r.passed:
            code = max(code, EXIT_FAIL)
    return code


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    logger = setup_logging(os.getenv("BUBBLELAB_LOG", "logs/bubblelab.log"))

    try:
        if args.experiment == "list":
            return _list()
        if args.experiment == "all":
            return _run_all(args, logger)
        return _run_one(args, logger)
    except FatalError as e:
        logger.error(f"{e}")
        return EXIT_USAGE
    except NumericalError as e:
        logger.error(f"{e}")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
