"""Per-depth arm-value estimation and arm selection.

Implements the normal-gamma conjugate model used by Thompson sampling plus
the three baseline selectors (UCB, epsilon-greedy, uniform). All selectors
are pure given an explicit ``numpy.random.Generator``; ties always break
toward the lowest arm index so results are reproducible.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "NormalGammaParams",
    "RewardsToGoBuffer",
    "ArmStats",
    "posterior",
    "sample_normal_gamma",
    "select_thompson",
    "select_ucb",
    "select_epsilon_greedy",
    "select_uniform",
]

DEFAULT_WINDOW = 10


@dataclass(frozen=True)
class NormalGammaParams:
    """Normal-gamma prior/posterior over the (mean, precision) of an action value.

    ``mu0`` is the prior mean, ``lambda0`` the number of pseudo-observations
    backing it, ``alpha0``/``beta0`` the shape/rate of the gamma belief over
    the precision.
    """

    mu0: float = 0.0
    lambda0: float = 1.0
    alpha0: float = 1.0
    beta0: float = 100.0

    def __post_init__(self) -> None:
        if not (self.lambda0 > 0.0):
            raise ValueError(f"lambda0 must be > 0, got {self.lambda0}")
        if not (self.alpha0 > 0.0):
            raise ValueError(f"alpha0 must be > 0, got {self.alpha0}")
        if not (self.beta0 > 0.0):
            raise ValueError(f"beta0 must be > 0, got {self.beta0}")


class RewardsToGoBuffer:
    """Sliding window of observed rewards-to-go for one (action, depth) pair.

    Pushing beyond ``capacity`` evicts the oldest value (FIFO). Mean and
    population variance are recomputed from the current window on every call,
    so they always match a direct recomputation.
    """

    __slots__ = ("_values",)

    def __init__(self, capacity: int = DEFAULT_WINDOW, values: Iterable[float] = ()):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self._values: deque[float] = deque((float(v) for v in values), maxlen=capacity)

    @property
    def capacity(self) -> int:
        return self._values.maxlen  # type: ignore[return-value]

    @property
    def values(self) -> tuple[float, ...]:
        """Window contents, oldest first."""
        return tuple(self._values)

    def push(self, value: float) -> None:
        self._values.append(float(value))

    def __len__(self) -> int:
        return len(self._values)

    def mean(self) -> float:
        """Window mean; 0.0 for an empty window."""
        if not self._values:
            return 0.0
        return math.fsum(self._values) / len(self._values)

    def variance(self) -> float:
        """Population variance (divisor n) of the window; 0.0 when empty."""
        n = len(self._values)
        if n == 0:
            return 0.0
        m = self.mean()
        return math.fsum((v - m) ** 2 for v in self._values) / n

    def __repr__(self) -> str:
        return f"RewardsToGoBuffer(capacity={self.capacity}, values={list(self._values)})"


@dataclass(frozen=True)
class ArmStats:
    """Windowed pull counts and mean for one arm of a UCB bandit.

    ``total_pulls`` is the bandit-level count n shared by every arm of the
    same bandit; it equals the sum of ``pulls`` across those arms.
    """

    pulls: int
    total_pulls: int
    mean: float


def posterior_arrays(
    prior: NormalGammaParams,
    n: np.ndarray,
    mean: np.ndarray,
    pop_variance: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized normal-gamma update from window statistics.

    ``n``, ``mean`` and ``pop_variance`` (divisor-n variance) may have any
    common shape; entries with n == 0 return the prior parameters exactly.
    Returns the posterior (mu, lambda, alpha, beta) arrays.
    """
    n = np.asarray(n, dtype=float)
    mean = np.asarray(mean, dtype=float)
    pop_variance = np.asarray(pop_variance, dtype=float)

    lam = prior.lambda0 + n
    mu = np.where(n > 0, (prior.lambda0 * prior.mu0 + n * mean) / lam, prior.mu0)
    alpha = prior.alpha0 + 0.5 * n
    quad = prior.lambda0 * n * (mean - prior.mu0) ** 2 / lam
    beta = np.where(n > 0, prior.beta0 + 0.5 * (n * pop_variance + quad), prior.beta0)
    return mu, lam, alpha, beta


def sample_normal_gamma_arrays(
    mu: np.ndarray,
    lam: np.ndarray,
    alpha: np.ndarray,
    beta: np.ndarray,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw (mean, precision) pairs from normal-gamma distributions elementwise.

    The precision is drawn first (Gamma with shape alpha, rate beta), then the
    mean from Normal(mu, 1 / (lam * tau)). Precisions are clamped away from an
    exact underflow to zero so the normal scale stays finite.
    """
    tau = rng.gamma(shape=alpha, scale=1.0 / np.asarray(beta, dtype=float))
    tau = np.maximum(tau, np.finfo(float).tiny)
    mus = rng.normal(loc=mu, scale=np.sqrt(1.0 / (np.asarray(lam, dtype=float) * tau)))
    return mus, tau


def posterior(prior: NormalGammaParams, observations: RewardsToGoBuffer) -> NormalGammaParams:
    """Normal-gamma posterior given the buffer's current window.

    Always recomputed from the full window (never incrementally), so the
    result depends only on the window contents, not on eviction history.
    An empty window returns the prior unchanged.
    """
    n = len(observations)
    if n == 0:
        return prior
    mu, lam, alpha, beta = posterior_arrays(
        prior,
        np.asarray(float(n)),
        np.asarray(observations.mean()),
        np.asarray(observations.variance()),
    )
    return NormalGammaParams(float(mu), float(lam), float(alpha), float(beta))


def sample_normal_gamma(
    params: NormalGammaParams, rng: np.random.Generator
) -> tuple[float, float]:
    """Sample a (mean, precision) pair from a normal-gamma distribution."""
    mus, taus = sample_normal_gamma_arrays(
        np.asarray(params.mu0),
        np.asarray(params.lambda0),
        np.asarray(params.alpha0),
        np.asarray(params.beta0),
        rng,
    )
    return float(mus), float(taus)


def _require_arms(num_arms: int) -> None:
    if num_arms < 1:
        raise ValueError("no arms")


def select_thompson(
    buffers: Sequence[RewardsToGoBuffer],
    prior: NormalGammaParams,
    rng: np.random.Generator,
) -> int:
    """Thompson selection: sample each arm's posterior mean, return the argmax arm."""
    _require_arms(len(buffers))
    n = np.array([len(b) for b in buffers], dtype=float)
    mean = np.array([b.mean() for b in buffers])
    var = np.array([b.variance() for b in buffers])
    mu, lam, alpha, beta = posterior_arrays(prior, n, mean, var)
    mus, _ = sample_normal_gamma_arrays(mu, lam, alpha, beta, rng)
    return int(np.argmax(mus))


def select_ucb(stats: Sequence[ArmStats], c: float = 1.0) -> int:
    """UCB selection: argmax of mean + c * sqrt(2 ln n / n_a).

    Arms that were never pulled score +inf, forcing initial exploration.
    Every entry carries the same bandit-level ``total_pulls``.
    """
    _require_arms(len(stats))
    total = stats[0].total_pulls
    scores = np.empty(len(stats))
    for i, s in enumerate(stats):
        if s.pulls == 0:
            scores[i] = np.inf
        else:
            scores[i] = s.mean + c * math.sqrt(2.0 * math.log(total) / s.pulls)
    return int(np.argmax(scores))


def select_epsilon_greedy(
    buffers: Sequence[RewardsToGoBuffer],
    epsilon: float,
    rng: np.random.Generator,
) -> int:
    """Greedy on window means with probability 1 - epsilon, else uniform.

    Arms with an empty window count as mean 0.
    """
    _require_arms(len(buffers))
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    if rng.random() < epsilon:
        return int(rng.integers(len(buffers)))
    means = np.array([b.mean() for b in buffers])
    return int(np.argmax(means))


def select_uniform(num_arms: int, rng: np.random.Generator) -> int:
    """Uniformly random arm."""
    _require_arms(num_arms)
    return int(rng.integers(num_arms))
