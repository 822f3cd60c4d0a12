"""
Policy-gradient training with replay memory and a greedy baseline.
"""

from .replay_memory import ReplayMemory, replay_sample
from .trainer import (
    EpisodeRow,
    TrainMetrics,
    TrainResult,
    ValidationReport,
    ValidationRow,
    make_optimizer,
    precompute_oracle,
    run_episode,
    sync_baseline,
    train,
    update_step,
    validate,
    write_metrics,
)

__all__ = [
    "ReplayMemory",
    "replay_sample",
    "EpisodeRow",
    "TrainMetrics",
    "TrainResult",
    "ValidationReport",
    "ValidationRow",
    "make_optimizer",
    "precompute_oracle",
    "run_episode",
    "sync_baseline",
    "train",
    "update_step",
    "validate",
    "write_metrics",
]
