"""
Waterfilling Budget Module

Distributes the base-station power across channels. For a multiplier lam
every channel takes
    q^k = max(gamma^k, B_c / lam - A2/G1 + A2/G2 - 1/G2)
and lam is found by bisection so that the budgets use exactly P_T.
"""

from typing import Sequence

import numpy as np

from ..exceptions import Infeasible, NoConvergence
from .power_allocation import ChannelPair, PowerAllocation, min_budget

RESIDUAL_REL_TOL = 1e-9
MAX_BISECTIONS = 200
MAX_EXPANSIONS = 2000


def _water_offsets(pairs: Sequence[ChannelPair]) -> np.ndarray:
    """c^k such that an unclamped budget is q^k = B_c / lam - c^k."""
    g1 = np.array([p.gamma1 for p in pairs])
    g2 = np.array([p.gamma2 for p in pairs])
    a2 = np.array([p.a2 for p in pairs])
    return a2 / g1 - a2 / g2 + 1.0 / g2


def _min_budgets(pairs: Sequence[ChannelPair]) -> np.ndarray:
    return np.array([min_budget(p) for p in pairs])


def budgets_for_lambda(pairs: Sequence[ChannelPair], lam: float, b_c: float) -> np.ndarray:
    """
    Channel budgets for a given Lagrange multiplier.

    Args:
        pairs: Ordered channel pairs
        lam: Multiplier, > 0
        b_c: Channel bandwidth in Hz

    Returns:
        (K,) budgets in watts, each clamped below at its minimum budget
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return np.maximum(_min_budgets(pairs), b_c / lam - _water_offsets(pairs))


def solve_budgets(pairs: Sequence[ChannelPair], p_t: float, b_c: float) -> PowerAllocation:
    """
    Find the multiplier whose budgets sum to the total power.

    Args:
        pairs: Ordered channel pairs
        p_t: Total base-station power in watts
        b_c: Channel bandwidth in Hz

    Returns:
        PowerAllocation with budgets and lam set

    Raises:
        Infeasible: The minimum budgets alone exceed p_t
        NoConvergence: The bracket or the residual tolerance was not reached
    """
    gammas = _min_budgets(pairs)
    offsets = _water_offsets(pairs)
    tolerance = RESIDUAL_REL_TOL * p_t
    total_min = float(gammas.sum())

    if total_min - p_t > tolerance:
        raise Infeasible(f"minimum budgets need {total_min:.6e} W > P_T = {p_t:.6e} W")

    if total_min >= p_t - tolerance:
        # Every channel sits on its clamp; take the smallest lam that clamps all
        lam = float(np.max(b_c / (gammas + offsets)))
        return PowerAllocation(budgets=gammas, lam=lam)

    def residual(lam: float) -> float:
        return float(np.maximum(gammas, b_c / lam - offsets).sum()) - p_t

    lam_low = b_c / (p_t + float(np.clip(offsets, 0.0, None).sum()))
    lam_high = lam_low
    for _ in range(MAX_EXPANSIONS):
        if residual(lam_high) <= 0.0:
            break
        lam_high *= 2.0
    else:
        raise NoConvergence(f"bracket expansion failed after {MAX_EXPANSIONS} doublings")

    lam = lam_high
    value = residual(lam)
    for _ in range(MAX_BISECTIONS):
        if abs(value) <= tolerance:
            break
        lam = 0.5 * (lam_low + lam_high)
        value = residual(lam)
        if value > 0.0:
            lam_low = lam
        else:
            lam_high = lam
    else:
        if abs(value) > tolerance:
            raise NoConvergence(f"residual {value:.3e} W after {MAX_BISECTIONS} bisections")

    return PowerAllocation(budgets=budgets_for_lambda(pairs, lam, b_c), lam=lam)
