"""Open-loop policies: one bandit per planning depth.

A policy owns an h x |A| grid of sliding-window buffers of rewards-to-go.
Sampling a plan selects one action per depth with the configured strategy;
updating pushes each depth's reward-to-go into the buffer of the action the
plan took at that depth. Plans are plain tuples of the agent's action
identifiers, length exactly ``horizon``.
"""

from __future__ import annotations

import enum
from typing import Hashable, Sequence

import numpy as np

from .bandit import (
    DEFAULT_WINDOW,
    ArmStats,
    NormalGammaParams,
    RewardsToGoBuffer,
    posterior_arrays,
    sample_normal_gamma_arrays,
)

__all__ = ["Strategy", "OpenLoopPolicy", "rewards_to_go"]

Plan = tuple


class Strategy(enum.Enum):
    """How a policy turns per-depth buffers into an action choice."""

    THOMPSON = "thompson"
    EPSILON_GREEDY = "epsilon_greedy"
    UCB = "ucb"
    UNIFORM = "uniform"


def rewards_to_go(rewards: Sequence[float]) -> np.ndarray:
    """Suffix sums of a reward sequence, computed right to left.

    output[i] = rewards[i] + output[i + 1], with output[-1] = rewards[-1].
    """
    r = np.asarray(rewards, dtype=float)
    if r.ndim != 1 or r.size == 0:
        raise ValueError("rewards must be a non-empty sequence")
    return np.cumsum(r[::-1])[::-1]


class OpenLoopPolicy:
    """Stack of ``horizon`` bandits over one agent's action set.

    Buffers are stored as a dense (horizon, num_actions, capacity) array with
    per-cell fill counts; slots at index >= count are kept at zero so window
    statistics vectorize exactly. Uniform-strategy policies never update
    (their buffers stay empty for the policy's whole life).
    """

    def __init__(
        self,
        actions: Sequence[Hashable],
        horizon: int,
        prior: NormalGammaParams | None = None,
        strategy: Strategy = Strategy.THOMPSON,
        capacity: int = DEFAULT_WINDOW,
        epsilon: float = 0.1,
        ucb_c: float = 1.0,
    ):
        if horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {horizon}")
        if len(actions) < 1:
            raise ValueError("action set must be non-empty")
        if len(set(actions)) != len(actions):
            raise ValueError("action identifiers must be unique")
        if capacity < 1:
            raise ValueError(f"window capacity must be >= 1, got {capacity}")
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
        self.actions = list(actions)
        self.horizon = horizon
        self.prior = prior if prior is not None else NormalGammaParams()
        self.strategy = strategy
        self.capacity = capacity
        self.epsilon = epsilon
        self.ucb_c = ucb_c
        self._index = {a: i for i, a in enumerate(self.actions)}
        self._values = np.zeros((horizon, len(actions), capacity))
        self._counts = np.zeros((horizon, len(actions)), dtype=np.int64)

    @property
    def num_actions(self) -> int:
        return len(self.actions)

    def clear(self) -> None:
        """Drop all observed rewards-to-go."""
        self._values.fill(0.0)
        self._counts.fill(0)

    def buffer(self, depth: int, action: Hashable) -> RewardsToGoBuffer:
        """Copy of the (depth, action) window as a standalone buffer."""
        arm = self._index[action]
        n = int(self._counts[depth, arm])
        return RewardsToGoBuffer(self.capacity, self._values[depth, arm, :n])

    def _push(self, depth: int, arm: int, value: float) -> None:
        n = self._counts[depth, arm]
        if n < self.capacity:
            self._values[depth, arm, n] = value
            self._counts[depth, arm] = n + 1
        else:
            row = self._values[depth, arm]
            row[:-1] = row[1:]
            row[-1] = value

    def window_stats(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(counts, means, population variances), each shaped (horizon, num_actions).

        Cells with an empty window report mean 0 and variance 0.
        """
        n = self._counts
        safe = np.maximum(n, 1).astype(float)
        mean = self._values.sum(axis=2) / safe
        mask = np.arange(self.capacity) < n[..., None]
        diffs = (self._values - mean[..., None]) * mask
        var = np.einsum("ijk,ijk->ij", diffs, diffs) / safe
        return n, mean, var

    def arm_stats(self, depth: int) -> list[ArmStats]:
        """Windowed UCB statistics for one depth (n is the depth's total fill)."""
        counts = self._counts[depth]
        total = int(counts.sum())
        safe = np.maximum(counts, 1).astype(float)
        means = self._values[depth].sum(axis=1) / safe
        return [
            ArmStats(pulls=int(counts[a]), total_pulls=total, mean=float(means[a]))
            for a in range(self.num_actions)
        ]

    def _sample_arm_indices(self, rng: np.random.Generator) -> np.ndarray:
        h, num_arms = self.horizon, self.num_actions
        if self.strategy is Strategy.UNIFORM:
            return rng.integers(0, num_arms, size=h)

        n, mean, var = self.window_stats()
        if self.strategy is Strategy.THOMPSON:
            mu, lam, alpha, beta = posterior_arrays(self.prior, n, mean, var)
            mus, _ = sample_normal_gamma_arrays(mu, lam, alpha, beta, rng)
            return np.argmax(mus, axis=1)

        if self.strategy is Strategy.EPSILON_GREEDY:
            arms = np.empty(h, dtype=np.int64)
            for i in range(h):
                if rng.random() < self.epsilon:
                    arms[i] = rng.integers(num_arms)
                else:
                    arms[i] = int(np.argmax(mean[i]))
            return arms

        if self.strategy is Strategy.UCB:
            totals = n.sum(axis=1)
            bonus = np.sqrt(2.0 * np.log(np.maximum(totals, 1))[:, None] / np.maximum(n, 1))
            scores = np.where(n > 0, mean + self.ucb_c * bonus, np.inf)
            return np.argmax(scores, axis=1)

        raise AssertionError(f"unhandled strategy {self.strategy}")

    def sample_plan(self, rng: np.random.Generator) -> Plan:
        """Draw a plan (one action per depth) from the current policy."""
        arms = self._sample_arm_indices(rng)
        return tuple(self.actions[a] for a in arms)

    def update(self, plan: Plan, rtg: Sequence[float]) -> None:
        """Push each depth's reward-to-go into the buffer of the plan's action there.

        A no-op for the uniform strategy, which never adapts its sampling.
        """
        if len(plan) != self.horizon or len(rtg) != self.horizon:
            raise ValueError(
                f"plan and rewards-to-go must both have length {self.horizon}, "
                f"got {len(plan)} and {len(rtg)}"
            )
        if self.strategy is Strategy.UNIFORM:
            return
        for depth, (action, value) in enumerate(zip(plan, rtg)):
            arm = self._index.get(action)
            if arm is None:
                raise ValueError(f"action {action!r} is not in this agent's action set")
            self._push(depth, arm, float(value))

    def best_plan(self) -> Plan:
        """Most preferred plan: the per-depth argmax of each arm's value estimate.

        Thompson and UCB rank arms by the posterior mean of the normal-gamma
        belief over the window; epsilon-greedy ranks by the raw window mean
        (its epsilon = 0 greedy choice). Ties break toward the lowest index.
        For the uniform strategy every score is zero, so this degenerates to
        the first action at every depth; the planning engine tracks the best
        simulated plan for such agents instead.
        """
        n, mean, var = self.window_stats()
        if self.strategy in (Strategy.EPSILON_GREEDY, Strategy.UNIFORM):
            scores = mean
        else:
            scores, _, _, _ = posterior_arrays(self.prior, n, mean, var)
        arms = np.argmax(scores, axis=1)
        return tuple(self.actions[a] for a in arms)
