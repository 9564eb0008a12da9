"""Smart-factory generative model.

Items (one per agent) carry an ordered list of required processing types and
choose which machine to enqueue at, or wait. Machines process the head of
their queue once per step, succeeding with probability 1 - failure_prob.
A matching success removes the item's front task and pays a task reward
(plus a completion bonus on the last task); a mismatched attempt ejects the
item with no progress. Every attempt costs the machine's processing cost.
All agents observe the same summed reward.

Machine and item identifiers are their positions in the state tuples.
State transitions are pure: ``factory_step`` never mutates its input.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Hashable, Sequence

import numpy as np

__all__ = [
    "FactoryAction",
    "WAIT",
    "Machine",
    "Item",
    "FactoryState",
    "MachineSpec",
    "FactoryConfig",
    "FactoryModel",
    "factory_step",
    "default_paper_config",
]


@dataclass(frozen=True)
class FactoryAction:
    """Enqueue at a machine (by index), or wait when ``machine_index`` is None."""

    machine_index: int | None = None

    @property
    def is_wait(self) -> bool:
        return self.machine_index is None

    def __repr__(self) -> str:
        return "WAIT" if self.is_wait else f"Enqueue({self.machine_index})"


WAIT = FactoryAction(None)


@dataclass(frozen=True)
class Machine:
    processing_type: Hashable
    cost: float
    failure_prob: float
    queue: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not 0.0 <= self.failure_prob <= 1.0:
            raise ValueError(f"failure_prob must lie in [0, 1], got {self.failure_prob}")
        if self.cost < 0.0:
            raise ValueError(f"cost must be >= 0, got {self.cost}")


@dataclass(frozen=True)
class Item:
    """``location`` is the index of the machine the item is queued at, or None if free."""

    remaining_tasks: tuple[Hashable, ...]
    location: int | None = None

    @property
    def complete(self) -> bool:
        return not self.remaining_tasks


@dataclass(frozen=True)
class FactoryState:
    machines: tuple[Machine, ...]
    items: tuple[Item, ...]
    step_count: int = 0


def factory_step(
    state: FactoryState,
    joint_action: Sequence[FactoryAction],
    rng: np.random.Generator,
    *,
    r_task: float = 10.0,
    r_complete: float = 20.0,
    eject_on_failure: bool = False,
) -> tuple[FactoryState, float]:
    """One synchronous factory transition.

    Phase 1: free, incomplete items with an enqueue action join that machine's
    queue tail, in item-id order (enqueued or completed items are coerced to
    wait). Phase 2: each machine with a non-empty queue attempts its head
    item, drawing failures in machine-id order. A failed attempt leaves the
    item at the head unless ``eject_on_failure``. Returns the successor state
    and the summed global reward.
    """
    items = state.items
    machines = state.machines
    if len(joint_action) != len(items):
        raise ValueError(
            f"joint action must have one entry per item: got {len(joint_action)} "
            f"actions for {len(items)} items"
        )

    queues = [list(m.queue) for m in machines]
    tasks = [it.remaining_tasks for it in items]
    location = [it.location for it in items]
    reward = 0.0

    for i, action in enumerate(joint_action):
        if action.machine_index is None:
            continue
        if location[i] is not None or not tasks[i]:
            continue
        m = action.machine_index
        if not 0 <= m < len(machines):
            raise ValueError(f"item {i} enqueued at unknown machine {m}")
        queues[m].append(i)
        location[i] = m

    for m, machine in enumerate(machines):
        q = queues[m]
        if not q:
            continue
        head = q[0]
        reward -= machine.cost
        if rng.random() < machine.failure_prob:
            if eject_on_failure:
                q.pop(0)
                location[head] = None
            continue
        if tasks[head] and tasks[head][0] == machine.processing_type:
            tasks[head] = tasks[head][1:]
            reward += r_task
            if not tasks[head]:
                reward += r_complete
        q.pop(0)
        location[head] = None

    next_state = FactoryState(
        machines=tuple(replace(m, queue=tuple(q)) for m, q in zip(machines, queues)),
        items=tuple(Item(tasks[i], location[i]) for i in range(len(items))),
        step_count=state.step_count + 1,
    )
    return next_state, reward


@dataclass(frozen=True)
class MachineSpec:
    processing_type: Hashable
    cost: float = 1.0
    failure_prob: float = 0.1


@dataclass(frozen=True)
class FactoryConfig:
    """Domain instance: the machines plus either explicit per-item task lists
    or a generator spec that draws ``tasks_per_item`` types per item with a
    fixed ``task_seed`` (so the instance is identical across runs)."""

    machines: tuple[MachineSpec, ...]
    task_lists: tuple[tuple[Hashable, ...], ...] | None = None
    num_items: int | None = None
    tasks_per_item: int | None = None
    task_seed: int = 0
    r_task: float = 10.0
    r_complete: float = 20.0

    def violations(self) -> list[str]:
        problems = []
        if not self.machines:
            problems.append("factory: at least one machine is required")
        for k, spec in enumerate(self.machines):
            if spec.cost < 0.0:
                problems.append(f"factory: machine {k} cost must be >= 0, got {spec.cost}")
            if not 0.0 <= spec.failure_prob <= 1.0:
                problems.append(
                    f"factory: machine {k} failure_prob must lie in [0, 1], "
                    f"got {spec.failure_prob}"
                )
        if self.task_lists is None:
            if self.num_items is None or self.tasks_per_item is None:
                problems.append(
                    "factory: provide either explicit task lists or both "
                    "num_items and tasks_per_item"
                )
            else:
                if self.num_items < 1:
                    problems.append(f"factory: num_items must be >= 1, got {self.num_items}")
                if self.tasks_per_item < 1:
                    problems.append(
                        f"factory: tasks_per_item must be >= 1, got {self.tasks_per_item}"
                    )
        else:
            if not self.task_lists:
                problems.append("factory: task_lists must be non-empty")
            types = {spec.processing_type for spec in self.machines}
            for i, lst in enumerate(self.task_lists):
                if not lst:
                    problems.append(f"factory: item {i} task list must be non-empty")
                for t in lst:
                    if t not in types:
                        problems.append(
                            f"factory: item {i} requires type {t!r} but no machine provides it"
                        )
        if self.r_task < 0.0:
            problems.append(f"factory: r_task must be >= 0, got {self.r_task}")
        if self.r_complete < 0.0:
            problems.append(f"factory: r_complete must be >= 0, got {self.r_complete}")
        return problems

    def resolve_task_lists(self) -> tuple[tuple[Hashable, ...], ...]:
        if self.task_lists is not None:
            return tuple(tuple(lst) for lst in self.task_lists)
        types = [spec.processing_type for spec in self.machines]
        rng = np.random.default_rng(np.random.SeedSequence(self.task_seed))
        return tuple(
            tuple(types[k] for k in rng.integers(0, len(types), size=self.tasks_per_item))
            for _ in range(self.num_items)  # type: ignore[arg-type]
        )


class FactoryModel:
    """Generative-model adapter over a :class:`FactoryConfig`.

    Exposes the planning engine's contract: ``initial_state``, a pure
    ``step(state, joint_action, rng)``, per-agent action sets (wait plus one
    enqueue per machine) and the designated no-op.
    """

    def __init__(self, config: FactoryConfig, *, eject_on_failure: bool = False):
        problems = config.violations()
        if problems:
            raise ValueError("; ".join(problems))
        self.config = config
        self.eject_on_failure = eject_on_failure
        self._task_lists = config.resolve_task_lists()
        self._actions = (WAIT,) + tuple(
            FactoryAction(m) for m in range(len(config.machines))
        )

    @property
    def num_agents(self) -> int:
        return len(self._task_lists)

    def initial_state(self) -> FactoryState:
        machines = tuple(
            Machine(spec.processing_type, spec.cost, spec.failure_prob)
            for spec in self.config.machines
        )
        items = tuple(Item(tasks) for tasks in self._task_lists)
        return FactoryState(machines, items)

    def step(
        self,
        state: FactoryState,
        joint_action: Sequence[FactoryAction],
        rng: np.random.Generator,
    ) -> tuple[FactoryState, float]:
        return factory_step(
            state,
            joint_action,
            rng,
            r_task=self.config.r_task,
            r_complete=self.config.r_complete,
            eject_on_failure=self.eject_on_failure,
        )

    def action_set(self, agent_index: int) -> tuple[FactoryAction, ...]:
        return self._actions

    def noop_action(self, agent_index: int) -> FactoryAction:
        return WAIT


def default_paper_config(
    *,
    cost: float = 1.0,
    failure_prob: float = 0.1,
    tasks_per_item: int = 6,
    task_seed: int = 0,
) -> FactoryConfig:
    """The 8-item, 4-machine setting (one machine per processing type).

    Joint one-step action space is 5^8 and the joint plan space at horizon 4
    is 5^32, above 10^22 options.
    """
    return FactoryConfig(
        machines=tuple(
            MachineSpec(processing_type=f"t{k}", cost=cost, failure_prob=failure_prob)
            for k in range(4)
        ),
        num_items=8,
        tasks_per_item=tasks_per_item,
        task_seed=task_seed,
    )
