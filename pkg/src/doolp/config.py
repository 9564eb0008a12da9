"""Experiment configuration: validation, JSON files, and grid expansion.

A config file is a JSON object with a ``defaults`` section (one experiment's
parameters) and an optional ``grid`` section mapping parameter names to lists
of values; the grid expands to the Cartesian product of those lists, each
combination overlaid on the defaults. A file without a ``defaults`` key is
treated as a single flat config.

Example::

    {
      "defaults": {
        "strategy": "dots", "budget": 64, "drop_rate": 0.0,
        "repetitions": 50, "episode_steps": 50, "horizon": 4,
        "master_seed": 1,
        "factory": {
          "machines": [{"type": "t0", "cost": 1.0, "failure_prob": 0.1},
                       {"type": "t1"}],
          "items": {"count": 4, "tasks_per_item": 4, "task_seed": 0}
        }
      },
      "grid": {"strategy": ["dots", "vmc"], "budget": [64, 512]}
    }

``factory.items`` is either a generator spec as above or an explicit list of
per-item task lists, e.g. ``[["t0", "t1"], ["t1", "t0"]]``.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any

from .bandit import NormalGammaParams
from .factory import FactoryConfig, MachineSpec
from .policy import Strategy

__all__ = [
    "STRATEGIES",
    "ConfigError",
    "ExperimentConfig",
    "strategy_for",
    "load_config_file",
]

STRATEGIES = ("dots", "epsilon_greedy", "ucb", "vmc")

_STRATEGY_MAP = {
    "dots": Strategy.THOMPSON,
    "epsilon_greedy": Strategy.EPSILON_GREEDY,
    "ucb": Strategy.UCB,
    "vmc": Strategy.UNIFORM,
}

DROPPED_AGENT_FILLERS = ("noop", "last_plan")


class ConfigError(ValueError):
    """Invalid configuration; ``problems`` lists every violation found."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {p}" for p in problems))


def strategy_for(name: str) -> Strategy:
    try:
        return _STRATEGY_MAP[name]
    except KeyError:
        raise ConfigError([f"strategy must be one of {STRATEGIES}, got {name!r}"]) from None


@dataclass(frozen=True)
class ExperimentConfig:
    """Full parameterization of one experiment cell."""

    factory: FactoryConfig
    strategy: str = "dots"
    budget: int = 64
    drop_rate: float = 0.0
    repetitions: int = 50
    episode_steps: int = 50
    horizon: int = 4
    window_capacity: int = 10
    prior: tuple[float, float, float, float] = (0.0, 1.0, 1.0, 100.0)
    epsilon: float = 0.1
    ucb_c: float = 1.0
    master_seed: int = 0
    reset_buffers_on_execute: bool = False
    budget_per_agent: bool = False
    eject_on_failure: bool = False
    dropped_agent_filler: str = "noop"

    def prior_params(self) -> NormalGammaParams:
        mu0, lambda0, alpha0, beta0 = self.prior
        return NormalGammaParams(mu0, lambda0, alpha0, beta0)

    def violations(self) -> list[str]:
        """Every constraint violation, so a report can list them all at once."""
        problems = []
        if self.strategy not in STRATEGIES:
            problems.append(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.budget < 1:
            problems.append(f"budget must be >= 1, got {self.budget}")
        if not 0.0 <= self.drop_rate <= 1.0:
            problems.append(f"drop_rate must lie in [0, 1], got {self.drop_rate}")
        if self.repetitions < 1:
            problems.append(f"repetitions must be >= 1, got {self.repetitions}")
        if self.episode_steps < 0:
            problems.append(f"episode_steps must be >= 0, got {self.episode_steps}")
        if self.horizon < 1:
            problems.append(f"horizon must be >= 1, got {self.horizon}")
        if self.window_capacity < 1:
            problems.append(f"window_capacity must be >= 1, got {self.window_capacity}")
        if len(self.prior) != 4:
            problems.append(f"prior must be (mu0, lambda0, alpha0, beta0), got {self.prior!r}")
        else:
            mu0, lambda0, alpha0, beta0 = self.prior
            if lambda0 <= 0.0:
                problems.append(f"prior lambda0 must be > 0, got {lambda0}")
            if alpha0 <= 0.0:
                problems.append(f"prior alpha0 must be > 0, got {alpha0}")
            if beta0 <= 0.0:
                problems.append(f"prior beta0 must be > 0, got {beta0}")
        if not 0.0 <= self.epsilon <= 1.0:
            problems.append(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.ucb_c <= 0.0:
            problems.append(f"ucb_c must be > 0, got {self.ucb_c}")
        if self.master_seed < 0:
            problems.append(f"master_seed must be >= 0, got {self.master_seed}")
        if self.dropped_agent_filler not in DROPPED_AGENT_FILLERS:
            problems.append(
                f"dropped_agent_filler must be one of {DROPPED_AGENT_FILLERS}, "
                f"got {self.dropped_agent_filler!r}"
            )
        problems.extend(self.factory.violations())
        return problems

    def validate(self) -> None:
        problems = self.violations()
        if problems:
            raise ConfigError(problems)

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready dict (also the canonical form hashed for config_id)."""
        d: dict[str, Any] = {
            "strategy": self.strategy,
            "budget": self.budget,
            "drop_rate": self.drop_rate,
            "repetitions": self.repetitions,
            "episode_steps": self.episode_steps,
            "horizon": self.horizon,
            "window_capacity": self.window_capacity,
            "prior": list(self.prior),
            "epsilon": self.epsilon,
            "ucb_c": self.ucb_c,
            "master_seed": self.master_seed,
            "reset_buffers_on_execute": self.reset_buffers_on_execute,
            "budget_per_agent": self.budget_per_agent,
            "eject_on_failure": self.eject_on_failure,
            "dropped_agent_filler": self.dropped_agent_filler,
            "factory": _factory_to_dict(self.factory),
        }
        return d

    def config_id(self) -> str:
        """Stable short hash of the canonical parameter set."""
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:12]


def _factory_to_dict(factory: FactoryConfig) -> dict[str, Any]:
    d: dict[str, Any] = {
        "machines": [
            {"type": m.processing_type, "cost": m.cost, "failure_prob": m.failure_prob}
            for m in factory.machines
        ],
        "r_task": factory.r_task,
        "r_complete": factory.r_complete,
    }
    if factory.task_lists is not None:
        d["items"] = [list(lst) for lst in factory.task_lists]
    else:
        d["items"] = {
            "count": factory.num_items,
            "tasks_per_item": factory.tasks_per_item,
            "task_seed": factory.task_seed,
        }
    return d


def _factory_from_dict(d: Any, problems: list[str]) -> FactoryConfig:
    fallback = FactoryConfig(machines=(MachineSpec("t0"),), num_items=1, tasks_per_item=1)
    if not isinstance(d, dict):
        problems.append(f"factory must be an object, got {type(d).__name__}")
        return fallback
    known = {"machines", "items", "r_task", "r_complete"}
    for key in sorted(set(d) - known):
        problems.append(f"factory: unknown key {key!r}")

    machines = []
    raw_machines = d.get("machines")
    if not isinstance(raw_machines, list) or not raw_machines:
        problems.append("factory: machines must be a non-empty list")
    else:
        for k, m in enumerate(raw_machines):
            if not isinstance(m, dict) or "type" not in m:
                problems.append(f"factory: machine {k} must be an object with a 'type' key")
                continue
            for key in sorted(set(m) - {"type", "cost", "failure_prob"}):
                problems.append(f"factory: machine {k}: unknown key {key!r}")
            machines.append(
                MachineSpec(
                    processing_type=m["type"],
                    cost=float(m.get("cost", 1.0)),
                    failure_prob=float(m.get("failure_prob", 0.1)),
                )
            )
    if not machines:
        return fallback

    kwargs: dict[str, Any] = {
        "machines": tuple(machines),
        "r_task": float(d.get("r_task", 10.0)),
        "r_complete": float(d.get("r_complete", 20.0)),
    }
    items = d.get("items")
    if isinstance(items, list):
        kwargs["task_lists"] = tuple(tuple(lst) for lst in items)
    elif isinstance(items, dict):
        for key in sorted(set(items) - {"count", "tasks_per_item", "task_seed"}):
            problems.append(f"factory: items: unknown key {key!r}")
        kwargs["num_items"] = items.get("count")
        kwargs["tasks_per_item"] = items.get("tasks_per_item")
        kwargs["task_seed"] = int(items.get("task_seed", 0))
    else:
        problems.append("factory: items must be a task-list array or a generator object")
        kwargs["num_items"] = 1
        kwargs["tasks_per_item"] = 1
    try:
        return FactoryConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        problems.append(f"factory: {exc}")
        return fallback


_SCALAR_FIELDS = {
    f.name: f.type for f in fields(ExperimentConfig) if f.name != "factory"
}


def config_from_dict(d: dict[str, Any]) -> ExperimentConfig:
    """Build and fully validate a config from a plain dict.

    Raises :class:`ConfigError` listing every problem found, including
    unknown keys.
    """
    problems: list[str] = []
    if not isinstance(d, dict):
        raise ConfigError([f"config must be an object, got {type(d).__name__}"])
    known = set(_SCALAR_FIELDS) | {"factory"}
    for key in sorted(set(d) - known):
        problems.append(f"unknown config key {key!r}")

    if "factory" not in d:
        problems.append("missing required section 'factory'")
        factory = _factory_from_dict({}, [])
    else:
        factory = _factory_from_dict(d["factory"], problems)

    kwargs: dict[str, Any] = {"factory": factory}
    for name in _SCALAR_FIELDS:
        if name in d:
            value = d[name]
            if name == "prior":
                if not isinstance(value, (list, tuple)) or len(value) != 4:
                    problems.append(
                        f"prior must be a 4-element list (mu0, lambda0, alpha0, beta0), "
                        f"got {value!r}"
                    )
                    continue
                value = tuple(float(v) for v in value)
            kwargs[name] = value

    try:
        config = ExperimentConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        problems.append(str(exc))
        raise ConfigError(problems)

    problems.extend(config.violations())
    if problems:
        raise ConfigError(problems)
    return config


def expand_grid(base: dict[str, Any], grid: dict[str, Any]) -> list[dict[str, Any]]:
    """Cartesian product of the grid lists, each combo overlaid on the base."""
    if not grid:
        return [dict(base)]
    problems = [
        f"grid: values for {k!r} must be a list" for k, v in grid.items()
        if not isinstance(v, list)
    ]
    if problems:
        raise ConfigError(problems)
    keys = sorted(grid)
    combos = []
    for values in itertools.product(*(grid[k] for k in keys)):
        d = dict(base)
        d.update(dict(zip(keys, values)))
        combos.append(d)
    return combos


def load_config_file(path: str | Path) -> list[ExperimentConfig]:
    """Parse a JSON config file into the expanded, validated config list.

    Raises :class:`ConfigError` with the aggregated report when any expanded
    config is invalid.
    """
    raw = json.loads(Path(path).read_text())
    if not isinstance(raw, dict):
        raise ConfigError(["config file must contain a JSON object"])
    if "defaults" in raw:
        for key in sorted(set(raw) - {"defaults", "grid"}):
            raise ConfigError([f"unknown top-level key {key!r} (expected defaults/grid)"])
        base = raw["defaults"]
        grid = raw.get("grid", {})
    else:
        base = {k: v for k, v in raw.items() if k != "grid"}
        grid = raw.get("grid", {})

    configs = []
    problems: list[str] = []
    for idx, d in enumerate(expand_grid(base, grid)):
        try:
            configs.append(config_from_dict(d))
        except ConfigError as exc:
            problems.extend(f"config[{idx}]: {p}" for p in exc.problems)
    if problems:
        raise ConfigError(problems)
    return configs


def with_master_seed(config: ExperimentConfig, master_seed: int) -> ExperimentConfig:
    return replace(config, master_seed=master_seed)
