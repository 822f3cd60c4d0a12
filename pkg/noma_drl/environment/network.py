"""
NOMA Network Instance Module

Samples one downlink scenario: user distances, per-user-per-channel Rayleigh
fading and the resulting channel-to-noise ratios.
Formula: h = g * d^(-alpha),  cnr = |h|^2 / sigma^2,  sigma^2 = N0 * B_c
"""

from dataclasses import dataclass

import numpy as np
import pandas as pd

from ..config.run_config import EnvConfig

# Rayleigh scale giving E[g^2] = 2 * sigma^2 = 1
RAYLEIGH_SCALE = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class NetworkInstance:
    """
    One sampled NOMA scenario.

    Attributes:
        seed: Seed that regenerates this instance bit-exactly
        distances: (N,) user distances to the base station in meters
        fading: (N, K) Rayleigh fading amplitudes
        cnr: (N, K) channel-to-noise ratios in 1/W
        b_c: Per-channel bandwidth in Hz
        d_max: Cell edge distance used for state normalization
    """
    seed: int
    distances: np.ndarray
    fading: np.ndarray
    cnr: np.ndarray
    b_c: float
    d_max: float

    @property
    def n_users(self) -> int:
        return int(self.cnr.shape[0])

    @property
    def n_channels(self) -> int:
        return int(self.cnr.shape[1])


def noise_power(config: EnvConfig) -> float:
    """
    Thermal noise power per channel.

    Args:
        config: Environment configuration (n0 in dBm/Hz)

    Returns:
        sigma^2 in watts
    """
    n0_w_per_hz = 10.0 ** ((config.n0 - 30.0) / 10.0)
    return n0_w_per_hz * config.b_c


def generate_instance(config: EnvConfig, seed: int) -> NetworkInstance:
    """
    Generate a NOMA scenario deterministically from a seed.

    Distances are uniform in [d_min, d_max]; fading amplitudes are i.i.d.
    Rayleigh with unit mean-square power per (user, channel).

    Args:
        config: Validated environment configuration
        seed: Instance seed

    Returns:
        NetworkInstance
    """
    rng = np.random.default_rng(int(seed))
    n, k = config.n_users, config.n_channels

    distances = rng.uniform(config.d_min, config.d_max, size=n)
    fading = rng.rayleigh(scale=RAYLEIGH_SCALE, size=(n, k))

    # h is an amplitude, so |h|^2 = g^2 * d^(-2 alpha)
    gain = (fading * distances[:, None] ** (-config.alpha)) ** 2
    cnr = gain / noise_power(config)

    return NetworkInstance(
        seed=int(seed),
        distances=distances,
        fading=fading,
        cnr=cnr,
        b_c=config.b_c,
        d_max=config.d_max,
    )


def instance_to_frame(instance: NetworkInstance) -> pd.DataFrame:
    """
    Flatten an instance into one row per (user, channel) for debugging dumps.

    Returns:
        DataFrame with columns seed,user,channel,distance_m,fading,cnr
    """
    users, channels = np.meshgrid(
        np.arange(instance.n_users), np.arange(instance.n_channels), indexing="ij"
    )
    return pd.DataFrame({
        "seed": instance.seed,
        "user": users.ravel(),
        "channel": channels.ravel(),
        "distance_m": instance.distances[users.ravel()],
        "fading": instance.fading.ravel(),
        "cnr": instance.cnr.ravel(),
    })
