"""
Assignment Evaluation Module

Turns a complete channel assignment into its optimal power allocation and sum
rate: order each channel's pair by CNR, waterfill the channel budgets, split
each budget in closed form and compute the rates.
Formula: sum_rate = sum_k (R1^k + R2^k)
"""

from typing import List

import numpy as np
import pandas as pd

from ..config.run_config import EnvConfig
from ..environment.network import NetworkInstance
from ..exceptions import Infeasible, MalformedAssignment
from ..utils.logger import get_logger
from .power_allocation import ChannelPair, PowerAllocation, pair_rates, split_budget
from .waterfilling import solve_budgets

logger = get_logger("noma_drl.jra.evaluator")


def channel_pairs(instance: NetworkInstance, assignment: np.ndarray, config: EnvConfig) -> List[ChannelPair]:
    """
    Ordered channel pairs of an assignment.

    Raises:
        MalformedAssignment: Wrong length, out-of-range channel, or a channel
            without exactly two users
    """
    assignment = np.asarray(assignment, dtype=np.int64)
    n, k = instance.n_users, instance.n_channels
    if assignment.shape != (n,):
        raise MalformedAssignment(f"assignment has shape {assignment.shape}, expected ({n},)")
    if ((assignment < 0) | (assignment >= k)).any():
        raise MalformedAssignment(f"channel indices must lie in [0, {k})")

    pairs = []
    a = config.rate_factor
    for channel in range(k):
        users = np.flatnonzero(assignment == channel)
        if len(users) != 2:
            raise MalformedAssignment(f"channel {channel} holds {len(users)} users, expected 2")
        u, v = int(users[0]), int(users[1])
        pairs.append(ChannelPair.ordered(u, v, instance.cnr[u, channel], instance.cnr[v, channel], a))
    return pairs


def evaluate_assignment(instance: NetworkInstance, assignment: np.ndarray, config: EnvConfig) -> PowerAllocation:
    """
    Optimal power allocation and sum rate of a channel assignment.

    Args:
        instance: NOMA scenario
        assignment: (N,) channel index per user, two users per channel
        config: Environment configuration (P_T, minimum rate)

    Returns:
        Complete PowerAllocation

    Raises:
        MalformedAssignment: See channel_pairs
        Infeasible: Minimum-rate budgets exceed P_T
    """
    return allocate_pairs(channel_pairs(instance, assignment, config), config.p_t, instance.b_c)


def allocation_to_frame(allocation: PowerAllocation) -> pd.DataFrame:
    """
    Per-channel table of an allocation.

    Returns:
        DataFrame with columns channel,user1,user2,gamma1,gamma2,q,p1,p2,r1,r2,sum_rate
    """
    return pd.DataFrame({
        "channel": np.arange(len(allocation.budgets)),
        "user1": [p.user1 for p in allocation.pairs],
        "user2": [p.user2 for p in allocation.pairs],
        "gamma1": [p.gamma1 for p in allocation.pairs],
        "gamma2": [p.gamma2 for p in allocation.pairs],
        "q": allocation.budgets,
        "p1": allocation.p1,
        "p2": allocation.p2,
        "r1": allocation.rates[:, 0],
        "r2": allocation.rates[:, 1],
        "sum_rate": allocation.sum_rate,
    })


def allocate_pairs(pairs: List[ChannelPair], p_t: float, b_c: float) -> PowerAllocation:
    """
    Power allocation for an explicit list of channel pairs.

    Same pipeline as evaluate_assignment without an instance.
    """
    solved = solve_budgets(pairs, p_t, b_c)
    splits = [split_budget(pair, float(q)) for pair, q in zip(pairs, solved.budgets)]
    p1 = np.array([s[0] for s in splits])
    p2 = np.array([s[1] for s in splits])
    rates = np.array([pair_rates(pair, a, b, b_c) for pair, (a, b) in zip(pairs, splits)]).reshape(-1, 2)
    return PowerAllocation(
        budgets=solved.budgets,
        lam=solved.lam,
        p1=p1,
        p2=p2,
        rates=rates,
        sum_rate=float(rates.sum()),
        pairs=tuple(pairs),
    )


def random_assignment(n_users: int, rng: np.random.Generator) -> np.ndarray:
    """
    Uniformly random assignment with two users per labeled channel.

    Returns:
        (N,) channel index per user
    """
    assignment = np.empty(n_users, dtype=np.int64)
    assignment[rng.permutation(n_users)] = np.arange(n_users) // 2
    return assignment


def random_assignment_rate(instance: NetworkInstance, config: EnvConfig,
                           n_draws: int = 100, seed: int = 0) -> float:
    """
    Mean JRA sum rate over random channel assignments.

    Infeasible draws are skipped.

    Args:
        instance: NOMA scenario
        config: Environment configuration
        n_draws: Number of random assignments
        seed: Sampling seed

    Returns:
        Mean sum rate in bit/s (nan if every draw is infeasible)
    """
    rng = np.random.default_rng(int(seed))
    rates = []
    for _ in range(n_draws):
        try:
            rates.append(evaluate_assignment(instance, random_assignment(instance.n_users, rng), config).sum_rate)
        except Infeasible:
            continue
    if not rates:
        logger.warning(f"Instance seed={instance.seed}: all {n_draws} random assignments infeasible")
        return float("nan")
    return float(np.mean(rates))
