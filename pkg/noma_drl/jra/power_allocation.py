"""
Per-Channel NOMA Power Allocation Module

Closed-form sum-rate-optimal split of a channel power budget between the
strong (user 1) and weak (user 2) user of a two-user NOMA channel.
Formulas:
    gamma_k = A2 (A1 - 1) / G1 + (A2 - 1) / G2
    p1 = (G2 q - A2 + 1) / (A2 G2),  p2 = q - p1
    R1 = B_c log2(1 + p1 G1),  R2 = B_c log2(1 + p2 G2 / (1 + p1 G2))
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from ..exceptions import BudgetTooSmall

# Relative slack accepted when comparing a budget with its minimum
BUDGET_REL_TOL = 1e-12


@dataclass(frozen=True)
class ChannelPair:
    """
    The two users sharing one channel, ordered by CNR.

    Attributes:
        gamma1: CNR of the strong user in 1/W
        gamma2: CNR of the weak user in 1/W
        a1, a2: Rate factors A_n = 2**(R_min / B_c)
        user1, user2: User indices
    """
    gamma1: float
    gamma2: float
    a1: float
    a2: float
    user1: int = 0
    user2: int = 1

    def __post_init__(self):
        if not (self.gamma1 >= self.gamma2 > 0):
            raise ValueError(f"need gamma1 >= gamma2 > 0, got {self.gamma1}, {self.gamma2}")
        if self.a1 < 2 or self.a2 < 2:
            raise ValueError(f"rate factors must be >= 2, got {self.a1}, {self.a2}")

    @classmethod
    def ordered(cls, user_a: int, user_b: int, gamma_a: float, gamma_b: float,
                a_a: float, a_b: Optional[float] = None) -> "ChannelPair":
        """
        Build a pair with the higher-CNR user first.

        Ties go to the lower user index as the strong user.
        """
        a_b = a_a if a_b is None else a_b
        if gamma_a > gamma_b or (gamma_a == gamma_b and user_a < user_b):
            return cls(float(gamma_a), float(gamma_b), float(a_a), float(a_b), int(user_a), int(user_b))
        return cls(float(gamma_b), float(gamma_a), float(a_b), float(a_a), int(user_b), int(user_a))


@dataclass(frozen=True, eq=False)
class PowerAllocation:
    """
    Power allocation across channels.

    Attributes:
        budgets: (K,) channel budgets q^k in watts
        lam: Lagrange multiplier of the total-power constraint
        p1, p2: (K,) strong/weak user powers in watts
        rates: (K, 2) achieved (R1, R2) in bit/s
        sum_rate: Total rate in bit/s
        pairs: The ordered channel pairs
    """
    budgets: np.ndarray
    lam: float
    p1: Optional[np.ndarray] = None
    p2: Optional[np.ndarray] = None
    rates: Optional[np.ndarray] = None
    sum_rate: float = 0.0
    pairs: Tuple[ChannelPair, ...] = ()


def min_budget(pair: ChannelPair) -> float:
    """
    Smallest channel budget at which both users reach their minimum rates.

    Args:
        pair: Ordered channel pair

    Returns:
        gamma^k in watts
    """
    return pair.a2 * (pair.a1 - 1.0) / pair.gamma1 + (pair.a2 - 1.0) / pair.gamma2


def split_budget(pair: ChannelPair, q: float) -> Tuple[float, float]:
    """
    Split a channel budget between the two users.

    The sum rate grows with p1, so p1 is as large as the weak user's
    minimum rate allows.

    Args:
        pair: Ordered channel pair
        q: Channel budget in watts

    Returns:
        (p1, p2) in watts with 0 <= p1 <= p2 and p1 + p2 = q

    Raises:
        BudgetTooSmall: q is below min_budget(pair)
    """
    gamma_min = min_budget(pair)
    if q < gamma_min * (1.0 - BUDGET_REL_TOL):
        raise BudgetTooSmall(f"budget {q:.6e} W below minimum {gamma_min:.6e} W")
    p1 = (pair.gamma2 * q - pair.a2 + 1.0) / (pair.a2 * pair.gamma2)
    p1 = max(0.0, p1)
    return p1, q - p1


def pair_rates(pair: ChannelPair, p1: float, p2: float, b_c: float) -> Tuple[float, float]:
    """
    Rates of the strong and weak user of one channel.

    Args:
        pair: Ordered channel pair
        p1, p2: Strong/weak user powers in watts
        b_c: Channel bandwidth in Hz

    Returns:
        (R1, R2) in bit/s
    """
    r1 = b_c * np.log2(1.0 + p1 * pair.gamma1)
    r2 = b_c * np.log2(1.0 + p2 * pair.gamma2 / (1.0 + p1 * pair.gamma2))
    return float(r1), float(r2)


def rate_general(cnr: float, powers_below: Sequence[float], own_power: float, b_c: float) -> float:
    """
    Rate of a user decoded after SIC, with the powers of the stronger users
    on its channel acting as interference.

    Args:
        cnr: The user's CNR in 1/W
        powers_below: Powers of the users decoded before it
        own_power: The user's power in watts
        b_c: Channel bandwidth in Hz

    Returns:
        Rate in bit/s
    """
    interference = float(np.sum(powers_below)) * cnr if len(powers_below) else 0.0
    return float(b_c * np.log2(1.0 + own_power * cnr / (1.0 + interference)))
