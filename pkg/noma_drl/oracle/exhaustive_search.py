"""
Exhaustive Search Module

Ground truth for channel assignment: enumerates every assignment of N users to
K = N/2 labeled channels with two users each, evaluates each one with JRA and
keeps the exact maximum and minimum sum rates.
Count: prod_{i=0}^{(N-2)/2} C(N - 2i, 2)
"""

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, List, Tuple

import numpy as np

from ..config.run_config import EnvConfig
from ..environment.network import NetworkInstance
from ..exceptions import AllInfeasible, BudgetExceeded, Infeasible
from ..jra.evaluator import evaluate_assignment
from ..utils.logger import get_logger

logger = get_logger("noma_drl.oracle")

DEFAULT_BUDGET = 10_000_000
INT64_MAX = 2 ** 63 - 1

Assignment = Tuple[int, ...]


@dataclass(frozen=True)
class SearchResult:
    """
    Extremes of the sum rate over all feasible assignments.

    Attributes:
        r_max, r_min: Best and worst sum rates in bit/s
        best_assignment, worst_assignment: Per-user channel indices
        n_evaluated: Feasible assignments evaluated
        n_infeasible: Assignments skipped as power-infeasible
    """
    r_max: float
    r_min: float
    best_assignment: Assignment
    worst_assignment: Assignment
    n_evaluated: int
    n_infeasible: int

    def error_rate(self, sum_rate: float) -> float:
        """
        Normalized regret of a sum rate: (r_max - r) / (r_max - r_min).

        Clamped to [0, 1], so a rate below r_min (0 for an infeasible
        assignment) counts as the worst. Returns 0 when every assignment
        achieves the same rate.
        """
        if self.r_max <= self.r_min:
            return 0.0
        return float(np.clip((self.r_max - sum_rate) / (self.r_max - self.r_min), 0.0, 1.0))


def assignment_count(n_users: int) -> int:
    """
    Number of labeled-channel assignments with two users per channel.

    Raises:
        ValueError: n_users odd or < 2
        OverflowError: The count does not fit a signed 64-bit integer
    """
    if n_users < 2 or n_users % 2:
        raise ValueError(f"n_users must be even and >= 2, got {n_users}")
    count = math.prod(math.comb(n_users - 2 * i, 2) for i in range(n_users // 2))
    if count > INT64_MAX:
        raise OverflowError(f"assignment count for N={n_users} exceeds 64-bit range")
    return count


def _pairings(remaining: Tuple[int, ...], channel: int, assignment: List[int]) -> Iterator[Assignment]:
    if not remaining:
        yield tuple(assignment)
        return
    for u, v in combinations(remaining, 2):
        assignment[u] = channel
        assignment[v] = channel
        rest = tuple(x for x in remaining if x != u and x != v)
        yield from _pairings(rest, channel + 1, assignment)


def enumerate_assignments(n_users: int) -> Iterator[Assignment]:
    """
    Yield every assignment exactly once.

    Channel i receives the i-th chosen unordered pair of the remaining users.

    Args:
        n_users: Even number of users

    Yields:
        Tuple of per-user channel indices
    """
    if n_users < 2 or n_users % 2:
        raise ValueError(f"n_users must be even and >= 2, got {n_users}")
    yield from _pairings(tuple(range(n_users)), 0, [-1] * n_users)


def search(instance: NetworkInstance, config: EnvConfig, budget: int = DEFAULT_BUDGET) -> SearchResult:
    """
    Exact best and worst sum rate of an instance.

    Ties are broken towards the lexicographically smallest assignment.

    Args:
        instance: NOMA scenario
        config: Environment configuration
        budget: Maximum number of assignments to enumerate

    Returns:
        SearchResult

    Raises:
        BudgetExceeded: The assignment count exceeds the budget
        AllInfeasible: No assignment is feasible
    """
    count = assignment_count(instance.n_users)
    if count > budget:
        raise BudgetExceeded(f"N={instance.n_users} needs {count} evaluations, budget is {budget}")

    logger.info(f"Exhaustive search on instance seed={instance.seed}: {count} assignments")

    best = worst = None
    r_max, r_min = -np.inf, np.inf
    n_evaluated = n_infeasible = 0

    for assignment in enumerate_assignments(instance.n_users):
        try:
            rate = evaluate_assignment(instance, np.array(assignment), config).sum_rate
        except Infeasible:
            n_infeasible += 1
            continue
        n_evaluated += 1
        if rate > r_max or (rate == r_max and assignment < best):
            r_max, best = rate, assignment
        if rate < r_min or (rate == r_min and assignment < worst):
            r_min, worst = rate, assignment

    if best is None:
        raise AllInfeasible(f"instance seed={instance.seed}: all {count} assignments infeasible")

    if n_infeasible:
        logger.warning(f"Instance seed={instance.seed}: skipped {n_infeasible} infeasible assignments")
    logger.info(f"Instance seed={instance.seed}: r_max={r_max:.6e}, r_min={r_min:.6e} bit/s")

    return SearchResult(
        r_max=float(r_max),
        r_min=float(r_min),
        best_assignment=best,
        worst_assignment=worst,
        n_evaluated=n_evaluated,
        n_infeasible=n_infeasible,
    )
