"""
Command-line entry point: `subdiff-lab --experiment gap-lip --nu 8 --trials 100 --seed 7`.

Exit codes: 0 success, 1 trial failure, 2 config error, 3 capacity error,
4 unwritable output path.
"""
from typing import List, Optional, Sequence
import argparse
import asyncio
import sys

from .core.base import CapacityError, ConfigError, LabException
from .core.config import (
    DISTRIBUTIONS,
    ENV_SEED,
    ENV_WORKERS,
    EXPERIMENTS,
    FORMATS,
    ExperimentConfig,
    env_default,
    validate,
)
from .system import SubdiffLab

EXIT_OK = 0
EXIT_TRIAL = 1
EXIT_CONFIG = 2
EXIT_CAPACITY = 3
EXIT_IO = 4


def _nu_list(raw: str) -> List[int]:
    try:
        return [int(item) for item in raw.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {raw!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="subdiff-lab",
        description="Reproduce uniform-law gaps and convergence for subdifferentials",
    )
    p.add_argument("--experiment", required=True, choices=EXPERIMENTS)
    p.add_argument("--nu", type=int, help="Sample size (gap-lip, gap-cvx, gadget-stats)")
    p.add_argument("--nu-list", type=_nu_list, help="Comma-separated sample sizes (ulln-1d, eps-ulln)")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=None, help=f"Root seed (CLI > env:{ENV_SEED} > 0)")
    p.add_argument("--tol", type=float, default=1e-6, help="Truncation tolerance of series evaluations")
    p.add_argument("--epsilon", type=float, help="Fixed epsilon (eps-ulln)")
    p.add_argument("--out", help="Report path; stdout when omitted")
    p.add_argument("--format", choices=FORMATS, default="json")
    p.add_argument("--n", type=int, help="Shatter width (shatter)")
    p.add_argument("--distribution", choices=sorted(DISTRIBUTIONS))
    p.add_argument("--grid-points", type=int, default=2001)
    p.add_argument("--workers", type=int, default=None, help=f"Worker threads (CLI > env:{ENV_WORKERS} > 1)")
    p.add_argument("--log-level", default="WARNING")
    p.add_argument("--check", action="store_true", help="Validate the config and exit without running")
    return p


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    return ExperimentConfig(
        experiment=args.experiment,
        nu=args.nu,
        nu_list=args.nu_list,
        trials=args.trials,
        seed=args.seed if args.seed is not None else env_default(ENV_SEED, 0),
        tol=args.tol,
        epsilon=args.epsilon,
        out=args.out,
        format=args.format,
        n=args.n,
        distribution=args.distribution,
        grid_points=args.grid_points,
        workers=args.workers if args.workers is not None else env_default(ENV_WORKERS, 1),
    )


async def run(config: ExperimentConfig, lab: Optional[SubdiffLab] = None) -> int:
    """Run `config`, print the report when no --out is given, and return the exit status."""
    lab = lab or SubdiffLab()
    try:
        report = await lab.run(config)
    except ConfigError as e:
        for issue in e.issues:
            print(f"error: {issue}", file=sys.stderr)
        return EXIT_CAPACITY if e.is_capacity else EXIT_CONFIG
    # ahead of OSError: RunTimeoutError is also a TimeoutError
    except CapacityError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CAPACITY
    except OSError as e:
        print(f"error: cannot write report: {e}", file=sys.stderr)
        return EXIT_IO
    except LabException as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_TRIAL
    if config.out is None:
        sys.stdout.write(lab.render(report, config.format))
    return EXIT_OK


def check(config: ExperimentConfig) -> int:
    """Print every config issue; exit status as `run` would report it."""
    issues = validate(config)
    for issue in issues:
        print(f"error: {issue}", file=sys.stderr)
    if not issues:
        return EXIT_OK
    return EXIT_CAPACITY if any(issue.kind == "capacity" for issue in issues) else EXIT_CONFIG


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except ConfigError as e:
        for issue in e.issues:
            print(f"error: {issue}", file=sys.stderr)
        return EXIT_CONFIG
    if args.check:
        return check(config)
    return asyncio.run(run(config, SubdiffLab(log_level=args.log_level)))


if __name__ == "__main__":
    sys.exit(main())
