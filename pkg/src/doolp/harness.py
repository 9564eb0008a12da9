"""Experiment orchestration: run config grids, aggregate, and write CSVs.

Episodes are independent given (config, run index), so they may execute in
parallel; results are sorted canonically by (config_id, run, step) before
writing, making the output byte-identical regardless of scheduling. Floats
are written with Python's shortest round-trip repr, so parsing an emitted
trace CSV reconstructs the values exactly.

Output files (in the chosen output directory):
  traces.csv    config_id,run,step,reward,cum_reward
  summary.csv   config_id,step,mean_cum_reward,std_cum_reward
  manifest.json config_id -> full parameter set
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .config import ConfigError, ExperimentConfig, with_master_seed
from .engine import run_episode

__all__ = [
    "RunTrace",
    "SummaryRow",
    "GridResult",
    "run_grid",
    "summarize",
    "write_traces_csv",
    "read_traces_csv",
    "write_summary_csv",
    "write_manifest",
]

TRACE_HEADER = ("config_id", "run", "step", "reward", "cum_reward")
SUMMARY_HEADER = ("config_id", "step", "mean_cum_reward", "std_cum_reward")


@dataclass(frozen=True)
class RunTrace:
    """Realized rewards of one episode, with their running sums."""

    config_id: str
    run: int
    rewards: tuple[float, ...]
    cum_rewards: tuple[float, ...]

    @classmethod
    def from_rewards(cls, config_id: str, run: int, rewards: Sequence[float]) -> "RunTrace":
        r = np.asarray(rewards, dtype=float)
        return cls(config_id, run, tuple(r.tolist()), tuple(np.cumsum(r).tolist()))


@dataclass(frozen=True)
class SummaryRow:
    config_id: str
    step: int
    mean_cum_reward: float
    std_cum_reward: float


@dataclass
class GridResult:
    traces: list[RunTrace] = field(default_factory=list)
    summary: list[SummaryRow] = field(default_factory=list)
    failures: list[tuple[str, int, str]] = field(default_factory=list)


def _episode_job(args: tuple[ExperimentConfig, str, int]):
    config, config_id, run = args
    try:
        rewards = run_episode(config, run)
        return (config_id, run, tuple(rewards.tolist()), None)
    except Exception as exc:  # preserve completed work on partial grid failure
        return (config_id, run, None, f"{type(exc).__name__}: {exc}")


def run_grid(
    configs: Sequence[ExperimentConfig],
    out_dir: str | Path | None = None,
    parallelism: int = 1,
    master_seed: int | None = None,
) -> GridResult:
    """Run every config for its configured repetitions and aggregate.

    All configs are validated up front (raising :class:`ConfigError` with the
    full report). Individual episode failures do not abort the grid: completed
    traces are kept and written, and failures are listed in the result.
    """
    if master_seed is not None:
        configs = [with_master_seed(c, master_seed) for c in configs]
    problems = []
    for idx, config in enumerate(configs):
        problems.extend(f"config[{idx}]: {p}" for p in config.violations())
    if problems:
        raise ConfigError(problems)

    jobs = [
        (config, config.config_id(), run)
        for config in configs
        for run in range(config.repetitions)
    ]
    if parallelism > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(_episode_job, jobs, chunksize=1))
    else:
        outcomes = [_episode_job(job) for job in jobs]

    result = GridResult()
    for config_id, run, rewards, error in outcomes:
        if error is None:
            result.traces.append(RunTrace.from_rewards(config_id, run, rewards))
        else:
            result.failures.append((config_id, run, error))
    result.traces.sort(key=lambda t: (t.config_id, t.run))
    if result.traces:
        result.summary = summarize(result.traces)

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_traces_csv(out / "traces.csv", result.traces)
        write_summary_csv(out / "summary.csv", result.summary)
        write_manifest(out / "manifest.json", configs)
    return result


def summarize(traces: Iterable[RunTrace]) -> list[SummaryRow]:
    """Per-(config, step) mean and sample standard deviation of cumulative reward.

    The standard deviation uses divisor n - 1; a single run records 0.
    """
    by_config: dict[str, list[RunTrace]] = {}
    for t in traces:
        by_config.setdefault(t.config_id, []).append(t)
    if not by_config:
        raise ValueError("summarize requires at least one trace")

    rows = []
    for config_id in sorted(by_config):
        group = by_config[config_id]
        lengths = {len(t.cum_rewards) for t in group}
        if len(lengths) != 1:
            raise ValueError(
                f"config {config_id}: traces disagree on episode length ({sorted(lengths)})"
            )
        cum = np.array([t.cum_rewards for t in sorted(group, key=lambda t: t.run)])
        means = cum.mean(axis=0)
        stds = cum.std(axis=0, ddof=1) if cum.shape[0] > 1 else np.zeros(cum.shape[1])
        rows.extend(
            SummaryRow(config_id, step, float(means[step]), float(stds[step]))
            for step in range(cum.shape[1])
        )
    return rows


def write_traces_csv(path: str | Path, traces: Sequence[RunTrace]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for t in traces:
            for step, (r, c) in enumerate(zip(t.rewards, t.cum_rewards)):
                writer.writerow((t.config_id, t.run, step, repr(r), repr(c)))


def read_traces_csv(path: str | Path) -> list[RunTrace]:
    """Parse a trace CSV back into RunTrace values (exact float round-trip)."""
    grouped: dict[tuple[str, int], list[tuple[int, float, float]]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != TRACE_HEADER:
            raise ValueError(f"unexpected trace CSV header: {header}")
        for row in reader:
            config_id, run, step, reward, cum = row
            grouped.setdefault((config_id, int(run)), []).append(
                (int(step), float(reward), float(cum))
            )
    traces = []
    for (config_id, run), rows in sorted(grouped.items()):
        rows.sort()
        if [s for s, _, _ in rows] != list(range(len(rows))):
            raise ValueError(f"trace ({config_id}, run {run}) has non-contiguous steps")
        traces.append(
            RunTrace(
                config_id,
                run,
                tuple(r for _, r, _ in rows),
                tuple(c for _, _, c in rows),
            )
        )
    return traces


def write_summary_csv(path: str | Path, rows: Sequence[SummaryRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_HEADER)
        for row in rows:
            writer.writerow(
                (row.config_id, row.step, repr(row.mean_cum_reward), repr(row.std_cum_reward))
            )


def read_summary_csv(path: str | Path) -> list[SummaryRow]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != SUMMARY_HEADER:
            raise ValueError(f"unexpected summary CSV header: {header}")
        for config_id, step, mean, std in reader:
            rows.append(SummaryRow(config_id, int(step), float(mean), float(std)))
    return rows


def write_manifest(path: str | Path, configs: Sequence[ExperimentConfig]) -> None:
    manifest = {c.config_id(): c.to_dict() for c in configs}
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
