"""
Channel Assignment Episode Module

Episodic environment in which each step assigns one user to one channel.
States are immutable values; applying an action returns a new state.
"""

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import IllegalAction
from .network import NetworkInstance

if TYPE_CHECKING:
    from ..jra.power_allocation import PowerAllocation

# Users per channel
CHANNEL_CAPACITY = 2

# Scale applied to log10(cnr) in the state tensor
CNR_FEATURE_SCALE = 0.1


@dataclass(frozen=True)
class Action:
    """Assign `user` to `channel`."""
    user: int
    channel: int

    def index(self, n_channels: int) -> int:
        """Flattened action index n*K + k."""
        return self.user * n_channels + self.channel

    @classmethod
    def from_index(cls, index: int, n_channels: int) -> "Action":
        user, channel = divmod(int(index), n_channels)
        return cls(user, channel)


@dataclass(frozen=True, eq=False)
class EpisodeState:
    """
    Partial channel assignment of one instance.

    Attributes:
        instance: The scenario being assigned
        assigned_channel: Per-user channel index, None while unassigned
        channel_count: Per-channel occupancy C_k in {0, 1, 2}
        step: Number of actions applied so far
    """
    instance: NetworkInstance
    assigned_channel: Tuple[Optional[int], ...]
    channel_count: Tuple[int, ...]
    step: int

    @property
    def is_terminal(self) -> bool:
        return self.step == self.instance.n_users

    def assignment(self) -> np.ndarray:
        """Per-user channel indices of a terminal state."""
        if not self.is_terminal:
            raise IllegalAction(f"assignment requested at step {self.step} of {self.instance.n_users}")
        return np.array(self.assigned_channel, dtype=np.int64)


def reset(instance: NetworkInstance) -> EpisodeState:
    """Start an episode with every user unassigned."""
    return EpisodeState(
        instance=instance,
        assigned_channel=(None,) * instance.n_users,
        channel_count=(0,) * instance.n_channels,
        step=0,
    )


def legal_mask(state: EpisodeState) -> np.ndarray:
    """
    Legal (user, channel) pairs of a state.

    Returns:
        (N, K) boolean grid; entry (n, k) is True iff user n is unassigned and
        channel k holds fewer than two users
    """
    unassigned = np.array([c is None for c in state.assigned_channel], dtype=bool)
    open_channel = np.array(state.channel_count, dtype=np.int64) < CHANNEL_CAPACITY
    return unassigned[:, None] & open_channel[None, :]


def apply_action(state: EpisodeState, action: Action) -> EpisodeState:
    """
    Assign a user to a channel.

    Args:
        state: Current state (left unmodified)
        action: Legal action

    Returns:
        Successor state

    Raises:
        IllegalAction: The action is out of range or masked out
    """
    n, k = action.user, action.channel
    if not (0 <= n < state.instance.n_users and 0 <= k < state.instance.n_channels):
        raise IllegalAction(f"action ({n}, {k}) out of range")
    if state.assigned_channel[n] is not None:
        raise IllegalAction(f"user {n} is already assigned to channel {state.assigned_channel[n]}")
    if state.channel_count[k] >= CHANNEL_CAPACITY:
        raise IllegalAction(f"channel {k} already holds {CHANNEL_CAPACITY} users")

    assigned = list(state.assigned_channel)
    assigned[n] = k
    counts = list(state.channel_count)
    counts[k] += 1
    return EpisodeState(
        instance=state.instance,
        assigned_channel=tuple(assigned),
        channel_count=tuple(counts),
        step=state.step + 1,
    )


def build_state(state: EpisodeState, n_features: int) -> np.ndarray:
    """
    Build the N x K x F state tensor.

    Features: 0 = log10(cnr) / 10, 1 = d_n / d_max (broadcast over channels),
    2 = C_k / 2 (broadcast over users).

    Args:
        state: Episode state
        n_features: F in {1, 2, 3}

    Returns:
        float64 array of shape (N, K, F)
    """
    if n_features not in (1, 2, 3):
        raise ValueError(f"n_features must be 1, 2 or 3, got {n_features}")

    instance = state.instance
    n, k = instance.n_users, instance.n_channels
    tensor = np.empty((n, k, n_features), dtype=np.float64)
    tensor[:, :, 0] = np.log10(instance.cnr) * CNR_FEATURE_SCALE
    if n_features >= 2:
        tensor[:, :, 1] = (instance.distances / instance.d_max)[:, None]
    if n_features == 3:
        tensor[:, :, 2] = (np.array(state.channel_count, dtype=np.float64) / CHANNEL_CAPACITY)[None, :]
    return tensor


def step_reward(state: EpisodeState, action: Action, powers: "PowerAllocation") -> float:
    """
    Per-step reward of an action, evaluated with a complete power allocation.

    The first user placed on a channel is rewarded with the interference-free
    rate form, the second with the interference-limited form. Diagnostic only;
    training uses the episode sum rate.

    Args:
        state: State in which the action was taken
        action: The action
        powers: Power allocation of the finished assignment

    Returns:
        Rate in bit/s
    """
    instance = state.instance
    k = action.channel
    gamma = instance.cnr[action.user, k]
    p1, p2 = powers.p1[k], powers.p2[k]
    if state.channel_count[k] == 0:
        return float(instance.b_c * np.log2(1.0 + p1 * gamma))
    return float(instance.b_c * np.log2(1.0 + p2 * gamma / (1.0 + p1 * gamma)))


def assignment_from_actions(actions: Iterable[Action], n_users: int) -> np.ndarray:
    """
    Per-user channel indices from an action sequence.

    Raises:
        IllegalAction: A user is assigned twice or left unassigned
    """
    assignment = np.full(n_users, -1, dtype=np.int64)
    for action in actions:
        if assignment[action.user] != -1:
            raise IllegalAction(f"user {action.user} assigned twice")
        assignment[action.user] = action.channel
    if (assignment < 0).any():
        raise IllegalAction("action sequence leaves users unassigned")
    return assignment


def replay_actions(instance: NetworkInstance, actions: Sequence[Action]) -> EpisodeState:
    """Apply a full action sequence from a fresh episode."""
    state = reset(instance)
    for action in actions:
        state = apply_action(state, action)
    return state
