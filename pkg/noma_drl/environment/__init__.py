"""
NOMA scenario generation and the channel-assignment episode.
"""

from .network import NetworkInstance, generate_instance, instance_to_frame, noise_power
from .episode import (
    Action,
    EpisodeState,
    apply_action,
    assignment_from_actions,
    build_state,
    legal_mask,
    replay_actions,
    reset,
    step_reward,
)

__all__ = [
    "NetworkInstance",
    "generate_instance",
    "instance_to_frame",
    "noise_power",
    "Action",
    "EpisodeState",
    "apply_action",
    "assignment_from_actions",
    "build_state",
    "legal_mask",
    "replay_actions",
    "reset",
    "step_reward",
]
