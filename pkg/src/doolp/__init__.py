"""Distributed online open-loop planning (DOOLP) with Thompson sampling (DOTS),
baseline strategies (epsilon-greedy, UCB, uniform/VMC), a smart-factory domain,
and a seeded experiment harness."""

from .bandit import (
    ArmStats,
    NormalGammaParams,
    RewardsToGoBuffer,
    posterior,
    sample_normal_gamma,
    select_epsilon_greedy,
    select_thompson,
    select_ucb,
    select_uniform,
)
from .config import STRATEGIES, ConfigError, ExperimentConfig, load_config_file
from .engine import (
    AgentHandle,
    CoordinationConfig,
    EpisodeStreams,
    coordination_set,
    execution_step,
    plan_iteration,
    planning_round,
    run_episode,
)
from .factory import (
    WAIT,
    FactoryAction,
    FactoryConfig,
    FactoryModel,
    FactoryState,
    Item,
    Machine,
    MachineSpec,
    default_paper_config,
    factory_step,
)
from .harness import RunTrace, SummaryRow, run_grid, summarize
from .policy import OpenLoopPolicy, Strategy, rewards_to_go

__version__ = "0.1.0"

__all__ = [
    "ArmStats",
    "NormalGammaParams",
    "RewardsToGoBuffer",
    "posterior",
    "sample_normal_gamma",
    "select_epsilon_greedy",
    "select_thompson",
    "select_ucb",
    "select_uniform",
    "OpenLoopPolicy",
    "Strategy",
    "rewards_to_go",
    "AgentHandle",
    "CoordinationConfig",
    "EpisodeStreams",
    "coordination_set",
    "plan_iteration",
    "planning_round",
    "execution_step",
    "run_episode",
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
    "STRATEGIES",
    "ConfigError",
    "ExperimentConfig",
    "load_config_file",
    "RunTrace",
    "SummaryRow",
    "run_grid",
    "summarize",
    "__version__",
]
