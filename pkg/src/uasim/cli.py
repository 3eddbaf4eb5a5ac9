"""Command-line entry point ``uasim``."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import PRESETS, load_config
from .errors import (
    ApproximationError,
    ConfigError,
    DimensionError,
    NumericalError,
    OracleBoundsError,
    TruncationError,
)
from .experiment import (
    default_threads,
    figure_command,
    oracle_check_command,
    powerlaw_command,
    run_command,
    sweep_command,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ORACLE_BOUNDS = 4
EXIT_REGIME = 5


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uasim", description="Unitary-averaging simulations.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate a config and write a results CSV")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--samples", type=_positive)
    run.add_argument("--threads", type=_positive, help="worker threads (default: $UASIM_THREADS or CPU count)")
    run.add_argument("--out")
    run.add_argument("--timing", action="store_true", help="fill the wallclock column")

    sweep = sub.add_parser("sweep", help="evaluate the config grid, optionally resuming")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--resume", action="store_true")
    sweep.add_argument("--threads", type=_positive)
    sweep.add_argument("--out")

    oracle = sub.add_parser("oracle-check", help="replay one noise draw in Fock space")
    oracle.add_argument("--config", required=True)
    oracle.add_argument("--sample", type=int, required=True)
    oracle.add_argument("--cutoff", type=_positive)

    pl = sub.add_parser("powerlaw", help="power-law extrapolation curves")
    target = pl.add_mutually_exclusive_group(required=True)
    target.add_argument("--modes", type=_int_list, help="mode counts, comma-separated")
    target.add_argument("--k", type=_int_list, help="noisy parameter counts, comma-separated")
    pl.add_argument("--n", type=_int_list, default=[1, 2])
    pl.add_argument("--sigma-from", type=float, default=0.0)
    pl.add_argument("--sigma-to", type=float, default=0.1)
    pl.add_argument("--steps", type=int, default=11)
    pl.add_argument("--r-base", type=float, default=0.1)
    pl.add_argument("--out")

    fig = sub.add_parser("figure", help="run a bundled figure preset")
    fig.add_argument("--id", required=True, choices=sorted(PRESETS))
    fig.add_argument("--out-dir", default="figures")
    fig.add_argument("--samples", type=_positive)
    fig.add_argument("--threads", type=_positive)
    return parser


def _dispatch(args) -> int:
    if args.command == "run":
        cfg = load_config(args.config)
        run_command(cfg, seed=args.seed, samples=args.samples,
                    threads=args.threads or default_threads(), out=args.out, timing=args.timing)
    elif args.command == "sweep":
        cfg = load_config(args.config)
        sweep_command(cfg, resume=args.resume, threads=args.threads or default_threads(), out=args.out)
    elif args.command == "oracle-check":
        cfg = load_config(args.config)
        report = oracle_check_command(cfg, args.sample, cutoff=args.cutoff)
        print(report.summary())
        if not report.passed:
            return EXIT_REGIME
    elif args.command == "powerlaw":
        powerlaw_command(out=args.out, modes=args.modes, ks=args.k, ns=args.n,
                         sigma_from=args.sigma_from, sigma_to=args.sigma_to,
                         steps=args.steps, r_base=args.r_base)
    elif args.command == "figure":
        figure_command(args.id, out_dir=args.out_dir, samples=args.samples,
                       threads=args.threads or default_threads())
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OracleBoundsError, TruncationError) as exc:
        print(f"oracle bounds: {exc}", file=sys.stderr)
        return EXIT_ORACLE_BOUNDS
    except DimensionError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ApproximationError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
