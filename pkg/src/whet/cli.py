"""Command line entry point.

    whet run --config scenario.cfg [--experiment fig3a] [--out out/]
             [--seed 123] [--trials 500] [--grid 2001] [--jobs 4]
             [--override key=value ...]

The WHET_LOG environment variable (error|warn|info|debug) controls
diagnostic verbosity on stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import ConfigError, load_config
from .experiments import run_experiment

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def _setup_logging() -> None:
    level = os.environ.get("WHET_LOG", "warn").strip().lower()
    if level not in _LOG_LEVELS:
        print(f"warning: unknown WHET_LOG level {level!r}; using 'warn'", file=sys.stderr)
        level = "warn"
    logging.basicConfig(
        level=_LOG_LEVELS[level],
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="whet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment from a config file")
    run.add_argument("--config", required=True, help="path to the config file")
    run.add_argument("--experiment", help="override the configured experiment")
    run.add_argument("--out", help="override the output directory")
    run.add_argument("--seed", type=int, help="override the base seed")
    run.add_argument("--trials", type=int, help="override the trial count")
    run.add_argument("--grid", type=int, help="override the grid sample count")
    run.add_argument("--jobs", type=int, default=1, help="parallel sweep rows")
    run.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override any config key (repeatable)",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = _build_parser().parse_args(argv)
    overrides = list(args.override)
    if args.experiment is not None:
        overrides.append(f"experiment={args.experiment}")
    if args.out is not None:
        overrides.append(f"out_dir={args.out}")
    if args.seed is not None:
        overrides.append(f"base_seed={args.seed}")
    if args.trials is not None:
        overrides.append(f"trials={args.trials}")
    if args.grid is not None:
        overrides.append(f"grid_n={args.grid}")
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        run_experiment(cfg, jobs=args.jobs)
    except Exception as exc:
        print(f"error: experiment {cfg.experiment}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
