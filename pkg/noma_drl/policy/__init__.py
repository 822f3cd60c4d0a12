"""
Channel-assignment policy: networks, checkpoints, rollouts and gradients.
"""

from .network import (
    MODEL_KINDS,
    PolicyParameters,
    build_module,
    copy_params,
    init_params,
    load_params,
    save_params,
)
from .rollout import (
    GREEDY,
    SAMPLE,
    Trajectory,
    forward,
    grad_weighted_log_prob,
    log_prob,
    masked_log_softmax,
    rollout,
    trajectory_log_probs,
)

__all__ = [
    "MODEL_KINDS",
    "PolicyParameters",
    "build_module",
    "copy_params",
    "init_params",
    "load_params",
    "save_params",
    "GREEDY",
    "SAMPLE",
    "Trajectory",
    "forward",
    "grad_weighted_log_prob",
    "log_prob",
    "masked_log_softmax",
    "rollout",
    "trajectory_log_probs",
]
