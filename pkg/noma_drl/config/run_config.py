"""
Run Configuration Module

Typed, validated configuration for the simulator, the policy and the trainer,
loaded from flat key=value text files. Unspecified keys take the defaults of
the reference simulation setup (6 users, 5 MHz, -170 dBm/Hz, 12 W, ...).
"""

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from dotenv.parser import parse_stream

from ..exceptions import ConfigParseError, ConfigValidationError
from ..utils.seeding import VALIDATION, derive_seeds

ARCHITECTURE_KINDS = ("fully_connected", "convolutional", "attention")

# Every documented key with its default, as it would be written in a file
DEFAULT_VALUES: Dict[str, str] = {
    "n_users": "6",
    "b_tot_hz": "5e6",
    "n0_dbm_hz": "-170",
    "alpha": "2",
    "d_min_m": "50",
    "d_max_m": "300",
    "r_min_bps_hz": "2",
    "p_t_w": "12",
    "features": "3",
    "arch": "fully_connected",
    "hidden_sizes": "128,128",
    "lr": "0.0005",
    "batch_size": "40",
    "replay_capacity": "10000",
    "replay": "on",
    "max_episodes": "10000",
    "val_every": "200",
    "val_seeds": "10",
    "val_threshold": "0.05",
    "loss_threshold": "0.01",
    "reward_scale": "1e-6",
    "clip_ratio": "0.2",
    "oracle_budget": "10000000",
    "record_wall_time": "false",
    "seed": "0",
    "output_dir": "runs",
}


@dataclass(frozen=True)
class EnvConfig:
    """
    Simulation parameters of one downlink NOMA cell.

    Units: b_tot in Hz, n0 in dBm/Hz, distances in meters, r_min in
    bit/s/Hz (the per-user minimum rate divided by the channel bandwidth),
    p_t in watts.
    """
    n_users: int = 6
    b_tot: float = 5e6
    n0: float = -170.0
    alpha: float = 2.0
    d_min: float = 50.0
    d_max: float = 300.0
    r_min: float = 2.0
    p_t: float = 12.0
    n_features: int = 3

    def __post_init__(self):
        if self.n_users < 2 or self.n_users % 2:
            raise ConfigValidationError("n_users", f"must be even and >= 2, got {self.n_users}")
        if not self.b_tot > 0:
            raise ConfigValidationError("b_tot_hz", f"must be positive, got {self.b_tot}")
        if not math.isfinite(self.n0):
            raise ConfigValidationError("n0_dbm_hz", f"must be finite, got {self.n0}")
        if not self.alpha > 0:
            raise ConfigValidationError("alpha", f"must be positive, got {self.alpha}")
        if not 0 < self.d_min < self.d_max:
            raise ConfigValidationError("d_min_m", f"need 0 < d_min < d_max, got {self.d_min}, {self.d_max}")
        # A_n = 2**r_min must be >= 2 for the closed-form power split
        if not self.r_min >= 1:
            raise ConfigValidationError("r_min_bps_hz", f"must be >= 1 bit/s/Hz, got {self.r_min}")
        if not self.p_t > 0:
            raise ConfigValidationError("p_t_w", f"must be positive, got {self.p_t}")
        if self.n_features not in (1, 2, 3):
            raise ConfigValidationError("features", f"must be 1, 2 or 3, got {self.n_features}")

    @property
    def n_channels(self) -> int:
        """Number of channels K = N / 2."""
        return self.n_users // 2

    @property
    def b_c(self) -> float:
        """Per-channel bandwidth in Hz."""
        return self.b_tot / self.n_channels

    @property
    def rate_factor(self) -> float:
        """A_n = 2**(R_min / B_c), identical for every user."""
        return 2.0 ** self.r_min


@dataclass(frozen=True)
class Architecture:
    """Policy network shape: kind, hidden widths and the (N, K, F) input grid."""
    kind: str
    hidden_sizes: Tuple[int, ...]
    input_dims: Tuple[int, int, int]

    def __post_init__(self):
        if self.kind not in ARCHITECTURE_KINDS:
            raise ConfigValidationError("arch", f"must be one of {ARCHITECTURE_KINDS}, got {self.kind!r}")
        if not self.hidden_sizes or any(h < 1 for h in self.hidden_sizes):
            raise ConfigValidationError("hidden_sizes", f"need at least one positive width, got {self.hidden_sizes}")
        if len(self.input_dims) != 3 or any(d < 1 for d in self.input_dims):
            raise ConfigValidationError("input_dims", f"must be (N, K, F), got {self.input_dims}")

    @property
    def n_actions(self) -> int:
        """Output dimension N*K."""
        return self.input_dims[0] * self.input_dims[1]

    @classmethod
    def for_env(cls, kind: str, hidden_sizes: Tuple[int, ...], env: EnvConfig) -> "Architecture":
        return cls(kind, tuple(hidden_sizes), (env.n_users, env.n_channels, env.n_features))


@dataclass(frozen=True)
class TrainConfig:
    """Trainer hyperparameters."""
    learning_rate: float = 0.0005
    batch_size: int = 40
    replay_capacity: int = 10000
    max_episodes: int = 10000
    val_every: int = 200
    val_seeds: Tuple[int, ...] = field(default_factory=lambda: tuple(derive_seeds(0, VALIDATION, 10)))
    val_threshold: float = 0.05
    loss_threshold: float = 0.01
    adam_betas: Tuple[float, float] = (0.9, 0.999)
    adam_eps: float = 1e-8
    replay_enabled: bool = True
    reward_scale: float = 1e-6
    clip_ratio: float = 0.2
    record_wall_time: bool = False
    oracle_budget: int = 10_000_000

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigValidationError("lr", f"must be positive, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ConfigValidationError("batch_size", f"must be >= 1, got {self.batch_size}")
        if self.replay_capacity < self.batch_size:
            raise ConfigValidationError("replay_capacity", f"must be >= batch_size ({self.batch_size}), got {self.replay_capacity}")
        if self.max_episodes < 0:
            raise ConfigValidationError("max_episodes", f"must be >= 0, got {self.max_episodes}")
        if self.val_every < 1:
            raise ConfigValidationError("val_every", f"must be >= 1, got {self.val_every}")
        if not self.val_seeds:
            raise ConfigValidationError("val_seeds", "need at least one validation seed")
        if self.val_threshold < 0:
            raise ConfigValidationError("val_threshold", f"must be >= 0, got {self.val_threshold}")
        if not self.loss_threshold > 0:
            raise ConfigValidationError("loss_threshold", f"must be positive, got {self.loss_threshold}")
        if not self.reward_scale > 0:
            raise ConfigValidationError("reward_scale", f"must be positive, got {self.reward_scale}")
        if not self.clip_ratio >= 0:
            raise ConfigValidationError("clip_ratio", f"must be >= 0, got {self.clip_ratio}")
        if self.oracle_budget < 1:
            raise ConfigValidationError("oracle_budget", f"must be >= 1, got {self.oracle_budget}")


@dataclass(frozen=True)
class RunConfig:
    """Everything one experiment run needs."""
    env: EnvConfig
    train: TrainConfig
    arch: Architecture
    master_seed: int = 0
    output_dir: str = "runs"
    values: Dict[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        expected = (self.env.n_users, self.env.n_channels, self.env.n_features)
        if tuple(self.arch.input_dims) != expected:
            raise ConfigValidationError("arch", f"input dims {self.arch.input_dims} do not match {expected}")
        if self.master_seed < 0:
            raise ConfigValidationError("seed", f"must be >= 0, got {self.master_seed}")

    def with_seed(self, seed: int) -> "RunConfig":
        """Same run with another master seed (validation seeds unchanged)."""
        # Pin the resolved validation seeds so rebuilding from values keeps them
        pinned = ",".join(str(s) for s in self.train.val_seeds) + ","
        return dataclasses.replace(
            self,
            master_seed=int(seed),
            values={**self.values, "seed": str(seed), "val_seeds": pinned},
        )

    def with_wall_time(self) -> "RunConfig":
        return dataclasses.replace(
            self,
            train=dataclasses.replace(self.train, record_wall_time=True),
            values={**self.values, "record_wall_time": "true"},
        )

    def with_output_dir(self, output_dir: str) -> "RunConfig":
        return dataclasses.replace(self, output_dir=str(output_dir), values={**self.values, "output_dir": str(output_dir)})


# Sweep axis -> configuration key it overrides
SWEEP_AXES: Dict[str, str] = {
    "learning_rate": "lr",
    "batch_size": "batch_size",
    "n_features": "features",
    "architecture": "arch",
    "p_t": "p_t_w",
    "n_users": "n_users",
    "r_min": "r_min_bps_hz",
    "replay_on_off": "replay",
}


@dataclass(frozen=True)
class SweepSpec:
    """One experiment axis: the values to try and how often to repeat each."""
    axis: str
    values: Tuple[str, ...]
    repeats: int = 1

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ConfigValidationError("axis", f"must be one of {sorted(SWEEP_AXES)}, got {self.axis!r}")
        if not self.values:
            raise ConfigValidationError("values", "need at least one value")
        if self.repeats < 1:
            raise ConfigValidationError("repeats", f"must be >= 1, got {self.repeats}")

    def apply(self, base: RunConfig, value: str) -> RunConfig:
        """Derive the run configuration for one axis value."""
        return build_run_config({**base.values, SWEEP_AXES[self.axis]: str(value)})

    def validate_against(self, base: RunConfig) -> None:
        """Type-check every value against the base configuration."""
        for value in self.values:
            self.apply(base, value)


def _to_int(key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        number = float(text)
    except ValueError:
        raise ConfigValidationError(key, f"expected an integer, got {text!r}")
    if not number.is_integer():
        raise ConfigValidationError(key, f"expected an integer, got {text!r}")
    return int(number)


def _to_float(key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigValidationError(key, f"expected a number, got {text!r}")


def _to_bool(key: str, text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("on", "true", "yes", "1"):
        return True
    if lowered in ("off", "false", "no", "0"):
        return False
    raise ConfigValidationError(key, f"expected on/off, got {text!r}")


def _to_int_list(key: str, text: str) -> Tuple[int, ...]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ConfigValidationError(key, "expected a comma-separated list of integers")
    return tuple(_to_int(key, p) for p in parts)


def _resolve_val_seeds(text: str, master_seed: int) -> Tuple[int, ...]:
    # A bare number is a count of derived seeds; a comma list is explicit
    if "," in text:
        return _to_int_list("val_seeds", text)
    count = _to_int("val_seeds", text)
    if count < 1:
        raise ConfigValidationError("val_seeds", f"count must be >= 1, got {count}")
    return tuple(derive_seeds(master_seed, VALIDATION, count))


def build_run_config(values: Dict[str, str]) -> RunConfig:
    """
    Build a validated RunConfig from raw key=value strings.

    Args:
        values: Mapping of documented keys to their textual values; missing
            keys take DEFAULT_VALUES

    Returns:
        RunConfig

    Raises:
        ConfigValidationError: Unknown key or invalid value
    """
    unknown = sorted(set(values) - set(DEFAULT_VALUES))
    if unknown:
        raise ConfigValidationError(unknown[0], "unknown configuration key")

    v = {**DEFAULT_VALUES, **values}
    seed = _to_int("seed", v["seed"])

    env = EnvConfig(
        n_users=_to_int("n_users", v["n_users"]),
        b_tot=_to_float("b_tot_hz", v["b_tot_hz"]),
        n0=_to_float("n0_dbm_hz", v["n0_dbm_hz"]),
        alpha=_to_float("alpha", v["alpha"]),
        d_min=_to_float("d_min_m", v["d_min_m"]),
        d_max=_to_float("d_max_m", v["d_max_m"]),
        r_min=_to_float("r_min_bps_hz", v["r_min_bps_hz"]),
        p_t=_to_float("p_t_w", v["p_t_w"]),
        n_features=_to_int("features", v["features"]),
    )
    train = TrainConfig(
        learning_rate=_to_float("lr", v["lr"]),
        batch_size=_to_int("batch_size", v["batch_size"]),
        replay_capacity=_to_int("replay_capacity", v["replay_capacity"]),
        max_episodes=_to_int("max_episodes", v["max_episodes"]),
        val_every=_to_int("val_every", v["val_every"]),
        val_seeds=_resolve_val_seeds(v["val_seeds"], seed),
        val_threshold=_to_float("val_threshold", v["val_threshold"]),
        loss_threshold=_to_float("loss_threshold", v["loss_threshold"]),
        replay_enabled=_to_bool("replay", v["replay"]),
        reward_scale=_to_float("reward_scale", v["reward_scale"]),
        clip_ratio=_to_float("clip_ratio", v["clip_ratio"]),
        record_wall_time=_to_bool("record_wall_time", v["record_wall_time"]),
        oracle_budget=_to_int("oracle_budget", v["oracle_budget"]),
    )
    arch = Architecture.for_env(v["arch"].strip(), _to_int_list("hidden_sizes", v["hidden_sizes"]), env)

    return RunConfig(
        env=env,
        train=train,
        arch=arch,
        master_seed=seed,
        output_dir=v["output_dir"],
        values=dict(values),
    )


def read_config_values(path: str) -> Dict[str, str]:
    """
    Read a flat key=value file into a dictionary of strings.

    Blank lines and '#' comments are skipped; later keys override earlier ones.

    Raises:
        ConfigParseError: A statement cannot be parsed or a key has no value
            (carries the line number)
    """
    values: Dict[str, str] = {}
    with open(path, encoding="utf-8") as stream:
        for binding in parse_stream(stream):
            if binding.key is None and not binding.error:
                continue
            if binding.error or binding.value is None:
                raise ConfigParseError(str(path), binding.original.line, binding.original.string.strip())
            values[binding.key.strip()] = binding.value.strip()
    return values


def load_config(path: Optional[str] = None) -> RunConfig:
    """
    Load a run configuration file.

    Args:
        path: Path to a key=value file; None gives the default configuration

    Returns:
        Validated RunConfig
    """
    if path is None:
        return build_run_config({})
    if not Path(path).exists():
        raise FileNotFoundError(f"configuration file not found: {path}")
    return build_run_config(read_config_values(path))


def default_run_config(**overrides: Any) -> RunConfig:
    """Default configuration with keyword overrides using file key names."""
    return build_run_config({k: str(v) for k, v in overrides.items()})
