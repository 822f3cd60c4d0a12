"""
Policy-Gradient Trainer Module

Training loop for the channel-assignment policy:
    1. generate a fresh instance per episode
    2. online policy samples an assignment (R), baseline picks greedily (R^bl)
    3. store the trajectory, sample a batch from replay memory
    4. Adam step along  mean_i (R_i - R^bl_i) * grad log p(zeta_i | S_i), skipping
       trajectories whose probability ratio left the clip_ratio trust region
    5. copy the online policy into the baseline when R > R^bl
    6. validate the baseline against exhaustive search every val_every episodes
"""

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd
import torch

from ..config.run_config import Architecture, EnvConfig, TrainConfig
from ..environment.episode import apply_action, replay_actions, reset, step_reward
from ..environment.network import NetworkInstance, generate_instance
from ..exceptions import BudgetExceeded, Infeasible
from ..jra.evaluator import evaluate_assignment
from ..oracle.exhaustive_search import SearchResult, search
from ..policy.network import PolicyParameters, copy_params, init_params
from ..policy.rollout import GREEDY, SAMPLE, Trajectory, rollout, trajectory_log_probs
from ..utils.csv_io import write_csv
from ..utils.logger import get_logger
from ..utils.seeding import EPISODE, INIT, REPLAY, ROLLOUT, derive_seed
from .replay_memory import ReplayMemory, replay_sample

logger = get_logger("noma_drl.trainer")

METRICS_COLUMNS = ["episode", "loss", "r_online", "r_baseline", "synced", "elapsed_s", "r_step_sum"]
VALIDATION_COLUMNS = ["episode", "seed", "r_max", "r_min", "r_bl", "error"]


@dataclass(frozen=True)
class ValidationRow:
    seed: int
    r_max: float
    r_min: float
    r_bl: float
    error: float


@dataclass(frozen=True)
class ValidationReport:
    """Baseline error rates on the validation seeds after one episode."""
    episode: int
    rows: Tuple[ValidationRow, ...]
    passed: bool

    @property
    def max_error(self) -> float:
        return max(row.error for row in self.rows)


@dataclass(frozen=True)
class EpisodeRow:
    episode: int
    loss: float
    r_online: float
    r_baseline: float
    synced: bool
    elapsed_s: float
    r_step_sum: float


@dataclass
class TrainMetrics:
    """Append-only per-episode and per-validation records of one run."""
    episodes: List[EpisodeRow] = field(default_factory=list)
    validations: List[ValidationReport] = field(default_factory=list)

    def episodes_frame(self) -> pd.DataFrame:
        return pd.DataFrame([vars(row) for row in self.episodes], columns=METRICS_COLUMNS)

    def validation_frame(self) -> pd.DataFrame:
        rows = [
            {"episode": report.episode, **vars(row)}
            for report in self.validations
            for row in report.rows
        ]
        return pd.DataFrame(rows, columns=VALIDATION_COLUMNS)


@dataclass
class TrainResult:
    baseline: PolicyParameters
    online: PolicyParameters
    metrics: TrainMetrics
    converged: bool
    episodes_run: int


def _sum_rate(instance: NetworkInstance, actions, config: EnvConfig):
    """JRA sum rate of an action sequence and its allocation; (0, None) when infeasible."""
    state = replay_actions(instance, actions)
    try:
        allocation = evaluate_assignment(instance, state.assignment(), config)
    except Infeasible:
        logger.warning(f"Instance seed={instance.seed}: assignment infeasible, return set to 0")
        return 0.0, None
    return allocation.sum_rate, allocation


def _step_reward_sum(instance: NetworkInstance, actions, allocation) -> float:
    if allocation is None:
        return 0.0
    state = reset(instance)
    total = 0.0
    for action in actions:
        total += step_reward(state, action, allocation)
        state = apply_action(state, action)
    return total


def run_episode(online: PolicyParameters, baseline: PolicyParameters, config: EnvConfig,
                episode_seed: int, rollout_seed: Optional[int] = None) -> Trajectory:
    """
    Play one episode with both policies on a fresh instance.

    Args:
        online: Policy sampled from
        baseline: Policy followed greedily
        config: Environment configuration
        episode_seed: Seed of the instance
        rollout_seed: Sampling seed of the online rollout (episode_seed if None)

    Returns:
        Trajectory with the online actions, both returns and the baseline actions
    """
    instance = generate_instance(config, episode_seed)
    seed = episode_seed if rollout_seed is None else rollout_seed

    actions, behavior_log_prob = rollout(online, instance, SAMPLE, seed)
    baseline_actions, _ = rollout(baseline, instance, GREEDY)

    r_online, allocation = _sum_rate(instance, actions, config)
    r_baseline, _ = _sum_rate(instance, baseline_actions, config)

    return Trajectory(
        instance_seed=int(episode_seed),
        actions=actions,
        return_online=r_online,
        return_baseline=r_baseline,
        baseline_actions=baseline_actions,
        behavior_log_prob=behavior_log_prob,
        step_reward_sum=_step_reward_sum(instance, actions, allocation),
    )


def make_optimizer(params: PolicyParameters, config: TrainConfig) -> torch.optim.Adam:
    return torch.optim.Adam(
        params.module.parameters(),
        lr=config.learning_rate,
        betas=config.adam_betas,
        eps=config.adam_eps,
    )


def update_step(online: PolicyParameters, batch: Sequence[Trajectory], optimizer: torch.optim.Optimizer,
                config: EnvConfig, reward_scale: float = 1.0, clip_ratio: float = 0.0) -> float:
    """
    One Adam step on a batch of stored trajectories.

    Log-probabilities are recomputed under the current online parameters by
    regenerating every instance from its seed; stored returns are reused.
    Minimizing  -mean(adv_i * log p_i)  ascends the advantage-weighted
    log-likelihood.

    With clip_ratio > 0 a trajectory drops out of the step once the current
    policy has moved far enough in its direction: ratio = p / p_behavior above
    1 + clip_ratio for a positive advantage, below 1 - clip_ratio for a
    negative one. Old replayed trajectories then stop being pushed further.

    Args:
        online: Policy being trained (updated in place)
        batch: Trajectories
        optimizer: Optimizer over online's parameters
        config: Environment configuration used to regenerate instances
        reward_scale: Factor applied to R - R^bl
        clip_ratio: Trust region around the behavior policy (0 disables)

    Returns:
        The loss -mean(adv_i * log p_i) over active trajectories before the step
    """
    if not batch:
        raise ValueError("batch must not be empty")
    instances = [generate_instance(config, traj.instance_seed) for traj in batch]
    advantages = torch.tensor([reward_scale * traj.advantage for traj in batch], dtype=torch.float64)

    optimizer.zero_grad()
    log_probs = trajectory_log_probs(online, [traj.actions for traj in batch], instances)
    if clip_ratio > 0:
        advantages = advantages * _inside_trust_region(log_probs.detach(), batch, advantages, clip_ratio)
    loss = -(advantages * log_probs).mean()
    loss.backward()
    optimizer.step()
    return float(loss.detach())


def _inside_trust_region(log_probs: torch.Tensor, batch: Sequence[Trajectory],
                         advantages: torch.Tensor, clip_ratio: float) -> torch.Tensor:
    behavior = torch.tensor([traj.behavior_log_prob for traj in batch], dtype=torch.float64)
    ratio = torch.exp(log_probs - behavior)
    active = ((advantages > 0) & (ratio < 1 + clip_ratio)) | ((advantages < 0) & (ratio > 1 - clip_ratio))
    return active.to(torch.float64)


def sync_baseline(online: PolicyParameters, baseline: PolicyParameters, traj: Trajectory) -> PolicyParameters:
    """Copy of the online policy if it beat the baseline on traj, else the baseline."""
    if traj.return_online > traj.return_baseline:
        return copy_params(online)
    return baseline


def precompute_oracle(config: EnvConfig, seeds: Sequence[int], budget: int) -> Dict[int, SearchResult]:
    """
    Exhaustive-search results of the validation instances.

    Raises:
        BudgetExceeded: The instance size is above the enumeration budget
    """
    return {int(seed): search(generate_instance(config, seed), config, budget) for seed in seeds}


def validate(baseline: PolicyParameters, config: EnvConfig, val_seeds: Sequence[int],
             oracle: Dict[int, SearchResult], threshold: float, episode: int = 0) -> ValidationReport:
    """
    Error rate of the greedy baseline on every validation seed.

        error = (r_max - r_bl) / (r_max - r_min) clamped to [0, 1], 0 when
        r_max = r_min and 1 when the baseline assignment is infeasible

    Args:
        baseline: Baseline policy
        config: Environment configuration
        val_seeds: Validation instance seeds
        oracle: Precomputed SearchResult per seed
        threshold: Largest accepted error
        episode: Episode index recorded in the report

    Returns:
        ValidationReport; passed iff every error <= threshold
    """
    rows = []
    for seed in val_seeds:
        instance = generate_instance(config, seed)
        actions, _ = rollout(baseline, instance, GREEDY)
        r_bl, allocation = _sum_rate(instance, actions, config)
        result = oracle[int(seed)]
        error = 1.0 if allocation is None else result.error_rate(r_bl)
        rows.append(ValidationRow(int(seed), result.r_max, result.r_min, r_bl, error))
    passed = all(row.error <= threshold for row in rows)
    return ValidationReport(episode=episode, rows=tuple(rows), passed=passed)


def write_metrics(metrics: TrainMetrics, out_dir) -> Tuple[Path, Path]:
    """Write metrics.csv and validation.csv into out_dir."""
    out_dir = Path(out_dir)
    metrics_path = out_dir / "metrics.csv"
    validation_path = out_dir / "validation.csv"
    write_csv(metrics.episodes_frame(), metrics_path)
    write_csv(metrics.validation_frame(), validation_path)
    return metrics_path, validation_path


def train(env_config: EnvConfig, train_config: TrainConfig, master_seed: int = 0,
          arch: Optional[Architecture] = None) -> TrainResult:
    """
    Train a channel-assignment policy.

    Stops when a validation passes and |loss| < loss_threshold, or after
    max_episodes (non-converged). Deterministic in master_seed.

    Args:
        env_config: Environment configuration
        train_config: Trainer hyperparameters
        master_seed: Seed of every random stream of the run
        arch: Policy architecture (fully connected [128, 128] if None)

    Returns:
        TrainResult with the final baseline, the metrics and the converged flag
    """
    arch = arch or Architecture.for_env("fully_connected", (128, 128), env_config)

    logger.info("=" * 60)
    logger.info("TRAINING STARTED")
    logger.info("=" * 60)
    logger.info(f"N={env_config.n_users}, K={env_config.n_channels}, F={env_config.n_features}, "
                f"P_T={env_config.p_t} W, r_min={env_config.r_min} bit/s/Hz")
    logger.info(f"{arch.kind} {list(arch.hidden_sizes)}, lr={train_config.learning_rate}, "
                f"batch={train_config.batch_size}, replay={'on' if train_config.replay_enabled else 'off'}, "
                f"seed={master_seed}")

    online = init_params(arch, derive_seed(master_seed, INIT))
    baseline = copy_params(online)
    optimizer = make_optimizer(online, train_config)
    capacity = train_config.replay_capacity if train_config.replay_enabled else train_config.batch_size
    memory = ReplayMemory(capacity)
    metrics = TrainMetrics()

    try:
        oracle: Optional[Dict[int, SearchResult]] = precompute_oracle(
            env_config, train_config.val_seeds, train_config.oracle_budget)
    except BudgetExceeded as exc:
        logger.warning(f"Validation disabled: {exc}")
        oracle = None

    start = time.perf_counter()
    converged = False
    episode = 0

    for episode in range(1, train_config.max_episodes + 1):
        traj = run_episode(
            online, baseline, env_config,
            episode_seed=derive_seed(master_seed, EPISODE, episode),
            rollout_seed=derive_seed(master_seed, ROLLOUT, episode),
        )
        memory.push(traj)

        if train_config.replay_enabled:
            batch = replay_sample(memory, train_config.batch_size, derive_seed(master_seed, REPLAY, episode))
        else:
            batch = memory.newest(train_config.batch_size)
        loss = update_step(online, batch, optimizer, env_config,
                           train_config.reward_scale, train_config.clip_ratio)

        synced = traj.return_online > traj.return_baseline
        baseline = sync_baseline(online, baseline, traj)

        elapsed = time.perf_counter() - start if train_config.record_wall_time else 0.0
        metrics.episodes.append(EpisodeRow(
            episode=episode,
            loss=loss,
            r_online=traj.return_online,
            r_baseline=traj.return_baseline,
            synced=synced,
            elapsed_s=elapsed,
            r_step_sum=traj.step_reward_sum,
        ))
        logger.debug(f"Episode {episode}: loss={loss:.6e}, R={traj.return_online:.6e}, "
                     f"R_bl={traj.return_baseline:.6e}, synced={synced}")
        if synced:
            logger.info(f"Episode {episode}: baseline synchronized (R={traj.return_online:.6e} > "
                        f"R_bl={traj.return_baseline:.6e})")

        if oracle is not None and episode % train_config.val_every == 0:
            report = validate(baseline, env_config, train_config.val_seeds, oracle,
                              train_config.val_threshold, episode)
            metrics.validations.append(report)
            logger.info(f"Validation at episode {episode}: max error={report.max_error:.4f}, "
                        f"passed={report.passed}, loss={loss:.6e}")
            if report.passed and abs(loss) < train_config.loss_threshold:
                converged = True
                break

    logger.info("=" * 60)
    logger.info(f"TRAINING COMPLETE: {episode} episodes, converged={converged}")
    logger.info("=" * 60)

    return TrainResult(
        baseline=baseline,
        online=online,
        metrics=metrics,
        converged=converged,
        episodes_run=episode,
    )
