"""
Joint resource allocation: optimal NOMA power allocation for a fixed
channel assignment.
"""

from .power_allocation import (
    ChannelPair,
    PowerAllocation,
    min_budget,
    pair_rates,
    rate_general,
    split_budget,
)
from .waterfilling import budgets_for_lambda, solve_budgets
from .evaluator import (
    allocate_pairs,
    allocation_to_frame,
    channel_pairs,
    evaluate_assignment,
    random_assignment,
    random_assignment_rate,
)

__all__ = [
    "ChannelPair",
    "PowerAllocation",
    "min_budget",
    "pair_rates",
    "rate_general",
    "split_budget",
    "budgets_for_lambda",
    "solve_budgets",
    "allocate_pairs",
    "allocation_to_frame",
    "channel_pairs",
    "evaluate_assignment",
    "random_assignment",
    "random_assignment_rate",
]
