"""
Replay Memory Module

Bounded FIFO of past trajectories, sampled uniformly in batches for
policy-gradient updates.
"""

from collections import deque
from typing import List

import numpy as np

from ..exceptions import EmptyMemory
from ..policy.rollout import Trajectory


class ReplayMemory:
    """Trajectory store that evicts the oldest entry once full."""

    def __init__(self, capacity: int):
        """
        Args:
            capacity: Maximum number of trajectories kept
        """
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.buffer = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self.buffer)

    def push(self, trajectory: Trajectory) -> None:
        self.buffer.append(trajectory)

    def newest(self, count: int) -> List[Trajectory]:
        """The `count` most recent trajectories, oldest first."""
        if not self.buffer:
            raise EmptyMemory("replay memory is empty")
        return list(self.buffer)[-count:]

    def sample(self, batch_size: int, rng_seed: int) -> List[Trajectory]:
        return replay_sample(self, batch_size, rng_seed)


def replay_sample(memory: ReplayMemory, batch_size: int, rng_seed: int) -> List[Trajectory]:
    """
    Uniform batch from replay memory.

    Without replacement when the memory holds at least batch_size entries,
    with replacement otherwise.

    Args:
        memory: Replay memory
        batch_size: Number of trajectories to draw
        rng_seed: Sampling seed

    Returns:
        List of trajectories

    Raises:
        EmptyMemory: Nothing has been stored yet
    """
    size = len(memory)
    if size == 0:
        raise EmptyMemory("cannot sample from an empty replay memory")
    rng = np.random.default_rng(int(rng_seed))
    indices = rng.choice(size, size=batch_size, replace=size < batch_size)
    return [memory.buffer[int(i)] for i in indices]
