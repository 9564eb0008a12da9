"""Command-line harness.

Subcommands:
  run        --config FILE [--out DIR] [--parallelism K] [--seed U64]
  validate   --config FILE
  summarize  --traces CSV [--out FILE]

The output directory defaults to ``./out`` and may be overridden by the
``DOOLP_OUT_DIR`` environment variable; an explicit --out wins over both.
Exit codes: 0 success, 1 validation failure, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .config import ConfigError, load_config_file
from .harness import read_traces_csv, run_grid, summarize, write_summary_csv

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="doolp",
        description="Distributed online open-loop planning experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a config grid and write CSV traces")
    run_p.add_argument("--config", required=True, help="JSON experiment config file")
    run_p.add_argument("--out", default=None, help="output directory (default: ./out)")
    run_p.add_argument("--parallelism", type=int, default=1, metavar="K",
                       help="episodes to run in parallel (default: 1)")
    run_p.add_argument("--seed", type=int, default=None, metavar="U64",
                       help="override every config's master seed")

    val_p = sub.add_parser("validate", help="check a config file and report all violations")
    val_p.add_argument("--config", required=True, help="JSON experiment config file")

    sum_p = sub.add_parser("summarize", help="aggregate a trace CSV into per-step mean/std")
    sum_p.add_argument("--traces", required=True, help="trace CSV produced by `run`")
    sum_p.add_argument("--out", default=None,
                       help="summary CSV path (default: print to stdout)")
    return parser


def _out_dir(explicit: str | None) -> Path:
    if explicit is not None:
        return Path(explicit)
    return Path(os.environ.get("DOOLP_OUT_DIR", "out"))


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        configs = load_config_file(args.config)
    except FileNotFoundError:
        print(f"error: config file not found: {args.config}", file=sys.stderr)
        return EXIT_RUNTIME
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_VALIDATION

    out = _out_dir(args.out)
    print(f"running {len(configs)} config(s) -> {out}", file=sys.stderr)
    try:
        result = run_grid(
            configs, out_dir=out, parallelism=args.parallelism, master_seed=args.seed
        )
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_VALIDATION

    print(
        f"wrote {len(result.traces)} trace(s) to {out / 'traces.csv'}", file=sys.stderr
    )
    if result.failures:
        print(f"{len(result.failures)} episode(s) failed:", file=sys.stderr)
        for config_id, run, error in result.failures:
            print(f"  {config_id} run {run}: {error}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    try:
        configs = load_config_file(args.config)
    except FileNotFoundError:
        print(f"error: config file not found: {args.config}", file=sys.stderr)
        return EXIT_RUNTIME
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_VALIDATION
    print(f"OK: {len(configs)} valid config(s)")
    return EXIT_OK


def _cmd_summarize(args: argparse.Namespace) -> int:
    try:
        traces = read_traces_csv(args.traces)
    except FileNotFoundError:
        print(f"error: trace file not found: {args.traces}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if not traces:
        print("error: trace file contains no data rows", file=sys.stderr)
        return EXIT_VALIDATION

    rows = summarize(traces)
    if args.out is not None:
        write_summary_csv(args.out, rows)
    else:
        print(",".join(("config_id", "step", "mean_cum_reward", "std_cum_reward")))
        for row in rows:
            print(
                f"{row.config_id},{row.step},{row.mean_cum_reward!r},{row.std_cum_reward!r}"
            )
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "validate": _cmd_validate, "summarize": _cmd_summarize}
    try:
        return handlers[args.command](args)
    except Exception as exc:  # any unhandled failure is a runtime error
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
