"""
Counter-based seed derivation.

Every random stream in a run (episode instances, rollout sampling, replay
sampling, validation and evaluation seeds, sweep repeats) is a pure function
of (master_seed, purpose, counter), so runs are reproducible without any
shared generator state.
"""

from typing import List

import numpy as np

# Purpose tags; distinct spawn keys keep the streams disjoint
EPISODE = 0
ROLLOUT = 1
REPLAY = 2
VALIDATION = 3
EVALUATION = 4
SWEEP = 5
INIT = 6


def derive_seed(master_seed: int, purpose: int, counter: int = 0) -> int:
    """
    Derive a 63-bit seed for one draw of one purpose.

    Args:
        master_seed: Run-level seed
        purpose: One of the purpose tags of this module
        counter: Index within the purpose (episode number, seed slot, ...)

    Returns:
        Non-negative integer seed
    """
    sequence = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(purpose), int(counter)))
    return int(sequence.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def derive_seeds(master_seed: int, purpose: int, count: int) -> List[int]:
    """Derive `count` consecutive seeds of one purpose."""
    return [derive_seed(master_seed, purpose, i) for i in range(count)]
