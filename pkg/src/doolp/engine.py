"""Distributed open-loop planning and execution loops.

Each agent owns an :class:`~doolp.policy.OpenLoopPolicy`. One planning
iteration samples the focal agent's plan, queries every non-dropped peer for
a plan sample from its live policy, rolls the joint plan through the
generative model for ``horizon`` steps, and updates the focal policy with the
rewards-to-go. The paper-style parallel loops are realized as a deterministic
round-robin over focal agents, which preserves the live-query semantics while
making every run an exact function of (config, master seed).

Randomness is split into named child streams per (run, purpose): one for
communication drops, one for simulated transitions, one for executed
transitions, and one per agent for plan sampling. An agent's stream is
consumed only by its own sampling, so changing one agent's strategy never
perturbs another agent's draws.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .policy import OpenLoopPolicy, Plan, Strategy, rewards_to_go

__all__ = [
    "AgentHandle",
    "CoordinationConfig",
    "GenerativeModel",
    "EpisodeStreams",
    "PlanningRoundState",
    "coordination_set",
    "plan_iteration",
    "planning_round",
    "execution_step",
    "run_episode",
]

DROPPED_AGENT_FILLERS = ("noop", "last_plan")


class GenerativeModel(Protocol):
    """Simulator contract: stochastic (state, joint action) -> (state, reward)."""

    def initial_state(self): ...

    def step(self, state, joint_action: Sequence, rng: np.random.Generator): ...

    def noop_action(self, agent_index: int): ...


@dataclass
class AgentHandle:
    """One agent: identifier plus its open-loop policy (which owns the action set)."""

    agent_id: int
    policy: OpenLoopPolicy

    @property
    def actions(self) -> list:
        return self.policy.actions


@dataclass(frozen=True)
class CoordinationConfig:
    """Gossip communication: every other agent is a candidate peer, and each
    is independently dropped with probability ``drop_rate`` per iteration.
    Dropped agents contribute ``dropped_filler`` actions to simulated joint
    plans: the domain no-op, or their last queried plan if one is cached."""

    drop_rate: float = 0.0
    topology: str = "all"
    dropped_filler: str = "noop"

    def __post_init__(self) -> None:
        if not 0.0 <= self.drop_rate <= 1.0:
            raise ValueError(f"drop_rate must lie in [0, 1], got {self.drop_rate}")
        if self.topology != "all":
            raise ValueError(f"unsupported topology {self.topology!r}")
        if self.dropped_filler not in DROPPED_AGENT_FILLERS:
            raise ValueError(
                f"dropped_filler must be one of {DROPPED_AGENT_FILLERS}, "
                f"got {self.dropped_filler!r}"
            )


class EpisodeStreams:
    """Named child random streams for one episode.

    Children are derived from (master_seed, run_index, purpose) spawn keys,
    so run k's streams never depend on how many runs exist and each purpose
    draws from its own independent generator.
    """

    _DROPS, _SIM, _REAL, _AGENT_BASE = 0, 1, 2, 3

    def __init__(self, master_seed: int, run_index: int, num_agents: int):
        def gen(purpose: int) -> np.random.Generator:
            seq = np.random.SeedSequence(master_seed, spawn_key=(run_index, purpose))
            return np.random.Generator(np.random.PCG64(seq))

        self.drops = gen(self._DROPS)
        self.sim = gen(self._SIM)
        self.real = gen(self._REAL)
        self.agents = [gen(self._AGENT_BASE + i) for i in range(num_agents)]


@dataclass
class PlanningRoundState:
    """Scratch state for one planning round.

    Tracks, per uniform-strategy (VMC) agent, the own plan whose simulated
    joint rollout scored best so far this round, and caches the most recent
    plan queried from every agent for the ``last_plan`` drop filler.
    """

    best_value: dict[int, float] = field(default_factory=dict)
    best_plan: dict[int, Plan] = field(default_factory=dict)
    last_plans: dict[int, Plan] = field(default_factory=dict)

    def note_rollout(self, agent_index: int, plan: Plan, value: float) -> None:
        if agent_index not in self.best_value or value > self.best_value[agent_index]:
            self.best_value[agent_index] = value
            self.best_plan[agent_index] = plan


def coordination_set(
    num_agents: int,
    focal: int,
    drop_rate: float,
    rng: np.random.Generator,
) -> list[int]:
    """Peers the focal agent queries this iteration.

    Starts from all other agents and independently drops each with
    probability ``drop_rate`` (one uniform draw per peer, in index order).
    """
    others = [i for i in range(num_agents) if i != focal]
    if not others:
        return others
    draws = rng.random(len(others))
    return [a for a, u in zip(others, draws) if u >= drop_rate]


def _filler_plan(
    model: GenerativeModel,
    agent_index: int,
    horizon: int,
    coordination: CoordinationConfig,
    round_state: PlanningRoundState,
) -> Plan:
    if coordination.dropped_filler == "last_plan":
        cached = round_state.last_plans.get(agent_index)
        if cached is not None:
            return cached
    return (model.noop_action(agent_index),) * horizon


def plan_iteration(
    agents: Sequence[AgentHandle],
    focal: int,
    state,
    model: GenerativeModel,
    coordination: CoordinationConfig,
    streams: EpisodeStreams,
    round_state: PlanningRoundState | None = None,
) -> float:
    """One planning-loop pass for the focal agent.

    Samples the focal plan, joins queried peer plans (dropped peers filled
    per the coordination config), simulates the joint plan for ``horizon``
    steps, and updates the focal policy with the rewards-to-go. Returns the
    rollout's cumulative reward.
    """
    if round_state is None:
        round_state = PlanningRoundState()
    focal_agent = agents[focal]
    horizon = focal_agent.policy.horizon

    own_plan = focal_agent.policy.sample_plan(streams.agents[focal])
    plans: dict[int, Plan] = {focal: own_plan}
    peers = coordination_set(len(agents), focal, coordination.drop_rate, streams.drops)
    for c in peers:
        queried = agents[c].policy.sample_plan(streams.agents[c])
        plans[c] = queried
        round_state.last_plans[c] = queried
    for i in range(len(agents)):
        if i not in plans:
            plans[i] = _filler_plan(model, i, horizon, coordination, round_state)

    sim_state = state
    rewards = np.empty(horizon)
    for depth in range(horizon):
        joint = tuple(plans[i][depth] for i in range(len(agents)))
        try:
            sim_state, rewards[depth] = model.step(sim_state, joint, streams.sim)
        except Exception as exc:
            raise RuntimeError(
                f"simulation step failed at depth {depth} while planning for "
                f"agent {focal_agent.agent_id}"
            ) from exc

    rtg = rewards_to_go(rewards)
    focal_agent.policy.update(own_plan, rtg)
    cumulative = float(rtg[0])
    if focal_agent.policy.strategy is Strategy.UNIFORM:
        round_state.note_rollout(focal, own_plan, cumulative)
    return cumulative


def planning_round(
    agents: Sequence[AgentHandle],
    state,
    model: GenerativeModel,
    coordination: CoordinationConfig,
    budget: int,
    streams: EpisodeStreams,
    *,
    budget_per_agent: bool = False,
) -> PlanningRoundState:
    """Run ``budget`` planning iterations, round-robin over focal agents.

    Iteration k plans for agent k mod |agents|, so the budget is shared
    across agents (or multiplied by |agents| with ``budget_per_agent``).
    Queries always read the other agents' current, live policies.
    """
    if budget < 1:
        raise ValueError(f"planning budget must be >= 1, got {budget}")
    iterations = budget * len(agents) if budget_per_agent else budget
    round_state = PlanningRoundState()
    for k in range(iterations):
        focal = k % len(agents)
        plan_iteration(agents, focal, state, model, coordination, streams, round_state)
    return round_state


def _chosen_plan(agent_index: int, agent: AgentHandle, round_state: PlanningRoundState) -> Plan:
    if agent.policy.strategy is Strategy.UNIFORM:
        tracked = round_state.best_plan.get(agent_index)
        if tracked is not None:
            return tracked
    return agent.policy.best_plan()


def execution_step(
    agents: Sequence[AgentHandle],
    state,
    model_sim: GenerativeModel,
    model_real: GenerativeModel,
    coordination: CoordinationConfig,
    budget: int,
    streams: EpisodeStreams,
    *,
    budget_per_agent: bool = False,
):
    """One execution-loop pass: plan from the observed state, then act.

    Runs a planning round against ``model_sim``, extracts each agent's most
    preferred plan's first action (uniform-strategy agents use their best
    simulated plan of the round), and executes the joint action on
    ``model_real``. Returns (next_state, joint_action, realized_reward).
    """
    round_state = planning_round(
        agents, state, model_sim, coordination, budget, streams,
        budget_per_agent=budget_per_agent,
    )
    joint = tuple(
        _chosen_plan(i, agent, round_state)[0] for i, agent in enumerate(agents)
    )
    next_state, reward = model_real.step(state, joint, streams.real)
    return next_state, joint, float(reward)


def build_agents(config, model) -> list[AgentHandle]:
    """One agent per model agent slot, all sharing the configured strategy."""
    from .config import strategy_for  # late import: config imports engine's deps

    strategy = strategy_for(config.strategy)
    prior = config.prior_params()
    return [
        AgentHandle(
            agent_id=i,
            policy=OpenLoopPolicy(
                actions=model.action_set(i),
                horizon=config.horizon,
                prior=prior,
                strategy=strategy,
                capacity=config.window_capacity,
                epsilon=config.epsilon,
                ucb_c=config.ucb_c,
            ),
        )
        for i in range(model.num_agents)
    ]


def run_episode(config, run_index: int = 0) -> np.ndarray:
    """Run one seeded episode of an experiment config.

    Builds the factory model and agents, then alternates planning rounds and
    executed joint actions for ``episode_steps`` steps. Returns the realized
    per-step rewards (cumulative sums are the harness's job).
    """
    from .factory import FactoryModel

    problems = config.violations()
    if problems:
        from .config import ConfigError

        raise ConfigError(problems)

    model = FactoryModel(config.factory, eject_on_failure=config.eject_on_failure)
    streams = EpisodeStreams(config.master_seed, run_index, model.num_agents)
    agents = build_agents(config, model)
    coordination = CoordinationConfig(
        drop_rate=config.drop_rate, dropped_filler=config.dropped_agent_filler
    )

    state = model.initial_state()
    rewards = np.empty(config.episode_steps)
    for t in range(config.episode_steps):
        if config.reset_buffers_on_execute:
            for agent in agents:
                agent.policy.clear()
        state, _, rewards[t] = execution_step(
            agents, state, model, model, coordination, config.budget, streams,
            budget_per_agent=config.budget_per_agent,
        )
    return rewards
