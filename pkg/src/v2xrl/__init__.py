"""Seed-reproducible simulator and learning engine for spectrum sharing in
vehicular networks: K V2V sidelinks pick sub-bands and transmit powers to
share the uplink spectrum of M V2I links, trained centrally with per-agent
deep Q-networks and executed distributively."""

__version__ = "0.1.0"

from .baselines import (
    CapacityError,
    MaxV2VPolicy,
    RandomPolicy,
    SilentPolicy,
    max_v2v_exhaustive,
    no_v2v_capacities,
)
from .config import (
    ConfigError,
    ExperimentSpec,
    SimConfig,
    TrainConfig,
    load_config,
    save_config,
)
from .env import (
    Action,
    Env,
    RewardParams,
    StepOutcome,
    compute_capacity,
    decode_action,
    encode_action,
    observation_size,
)
from .harness import calibrate_reward, run_experiment
from .kernels import current_backend
from .qnet import QNetwork, RMSPropState, backward, rmsprop_step, sync_target
from .replay import ReplayMemory
from .rngstreams import SeedHierarchy, seed_hierarchy
from .trainer import (
    GreedyMarlPolicy,
    GreedySarlPolicy,
    epsilon_schedule,
    evaluate,
    select_action,
    td_targets,
    train,
)

__all__ = [
    "Action",
    "CapacityError",
    "ConfigError",
    "Env",
    "ExperimentSpec",
    "GreedyMarlPolicy",
    "GreedySarlPolicy",
    "MaxV2VPolicy",
    "QNetwork",
    "RMSPropState",
    "RandomPolicy",
    "ReplayMemory",
    "RewardParams",
    "SeedHierarchy",
    "SilentPolicy",
    "SimConfig",
    "StepOutcome",
    "TrainConfig",
    "backward",
    "calibrate_reward",
    "compute_capacity",
    "current_backend",
    "decode_action",
    "encode_action",
    "epsilon_schedule",
    "evaluate",
    "load_config",
    "max_v2v_exhaustive",
    "no_v2v_capacities",
    "observation_size",
    "rmsprop_step",
    "run_experiment",
    "save_config",
    "seed_hierarchy",
    "select_action",
    "sync_target",
    "td_targets",
    "train",
]
