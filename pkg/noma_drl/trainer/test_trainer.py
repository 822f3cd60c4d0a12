import dataclasses

import numpy as np
import pandas as pd
import pytest
import torch

from noma_drl.config.run_config import Architecture, EnvConfig, TrainConfig, default_run_config
from noma_drl.environment.network import generate_instance
from noma_drl.oracle.exhaustive_search import SearchResult, search
from noma_drl.policy.network import copy_params, init_params
from noma_drl.policy.rollout import GREEDY, SAMPLE, Trajectory, grad_weighted_log_prob, log_prob, rollout
from noma_drl.trainer.trainer import (
    make_optimizer,
    precompute_oracle,
    run_episode,
    sync_baseline,
    train,
    update_step,
    validate,
    write_metrics,
)

ENV_4 = EnvConfig(n_users=4)
SMALL = Architecture.for_env("fully_connected", (16, 16), ENV_4)
NEVER_CONVERGE = dict(val_threshold=0.0, loss_threshold=1e-300)


def small_train_config(**overrides):
    values = dict(batch_size=8, replay_capacity=100, max_episodes=20, val_every=10,
                  val_seeds=(1, 2, 3), learning_rate=0.001)
    values.update(overrides)
    return TrainConfig(**values)


def flat_grad(grads):
    return torch.cat([g.reshape(-1) for g in grads]).numpy()


def test_run_episode_returns_both_rates():
    online = init_params(SMALL, 0)
    baseline = init_params(SMALL, 1)
    traj = run_episode(online, baseline, ENV_4, episode_seed=12, rollout_seed=3)
    instance = generate_instance(ENV_4, 12)
    oracle = search(instance, ENV_4)

    assert traj.instance_seed == 12
    assert traj.baseline_actions == rollout(baseline, instance, GREEDY)[0]
    assert traj.actions == rollout(online, instance, SAMPLE, 3)[0]
    assert oracle.r_min * (1 - 1e-12) <= traj.return_online <= oracle.r_max * (1 + 1e-12)
    assert oracle.r_min * (1 - 1e-12) <= traj.return_baseline <= oracle.r_max * (1 + 1e-12)
    assert traj.behavior_log_prob == pytest.approx(log_prob(online, traj, instance), abs=1e-12)
    assert traj.step_reward_sum > 0


def test_two_users_always_tie():
    env = EnvConfig(n_users=2)
    arch = Architecture.for_env("fully_connected", (8,), env)
    online, baseline = init_params(arch, 0), init_params(arch, 1)
    for seed in range(5):
        traj = run_episode(online, baseline, env, seed)
        assert traj.return_online == traj.return_baseline


def test_infeasible_episode_has_zero_return():
    env = EnvConfig(n_users=4, p_t=1e-12)
    arch = Architecture.for_env("fully_connected", (8,), env)
    traj = run_episode(init_params(arch, 0), init_params(arch, 0), env, 0)
    assert traj.return_online == 0.0 and traj.return_baseline == 0.0
    assert traj.step_reward_sum == 0.0


def test_first_adam_step_moves_by_learning_rate_along_the_gradient_sign():
    online = init_params(SMALL, 0)
    instance = generate_instance(ENV_4, 5)
    actions, _ = rollout(online, instance, SAMPLE, 0)
    traj = Trajectory(5, actions, return_online=3e6, return_baseline=2e6)

    grad = flat_grad(grad_weighted_log_prob(online, [(traj, 1.0)], [instance]))
    before = online.vector()
    optimizer = make_optimizer(online, small_train_config(learning_rate=0.01))
    loss = update_step(online, [traj], optimizer, ENV_4, reward_scale=1e-6)
    delta = online.vector() - before

    assert loss == pytest.approx(-log_prob(init_params(SMALL, 0), traj, instance), rel=1e-12)
    strong = np.abs(grad) > 1e-4
    assert strong.any()
    np.testing.assert_allclose(delta[strong], 0.01 * np.sign(grad[strong]), rtol=1e-3)
    assert (delta[grad == 0] == 0).all()


def test_zero_advantage_leaves_parameters_unchanged():
    online = init_params(SMALL, 0)
    instance = generate_instance(ENV_4, 5)
    traj = Trajectory(5, rollout(online, instance, SAMPLE, 0)[0], return_online=2e6, return_baseline=2e6)
    before = online.vector()

    optimizer = make_optimizer(online, small_train_config())
    for _ in range(3):
        assert update_step(online, [traj], optimizer, ENV_4) == 0.0

    np.testing.assert_array_equal(online.vector(), before)


def test_update_recomputes_log_probs_under_current_parameters():
    online = init_params(SMALL, 0)
    traj = run_episode(online, init_params(SMALL, 1), ENV_4, 8, 8)
    traj = dataclasses.replace(traj, return_online=traj.return_baseline + 1e6)

    update_step(online, [traj], make_optimizer(online, small_train_config()), ENV_4, 1e-6)

    recomputed = log_prob(online, traj, generate_instance(ENV_4, 8))
    assert recomputed != pytest.approx(traj.behavior_log_prob, abs=1e-9)


def test_loss_is_negative_mean_weighted_log_prob():
    online = init_params(SMALL, 2)
    batch = [
        dataclasses.replace(run_episode(online, online, ENV_4, s, s), return_online=4e6, return_baseline=1e6 * s)
        for s in range(3)
    ]
    instances = [generate_instance(ENV_4, s) for s in range(3)]
    expected = -np.mean([(4.0 - s) * log_prob(online, t, inst) for s, (t, inst) in enumerate(zip(batch, instances))])

    loss = update_step(online, batch, make_optimizer(online, small_train_config()), ENV_4, 1e-6)
    assert loss == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("advantage,log_ratio", [(1e6, 1.0), (-1e6, -1.0)])
def test_trajectory_outside_trust_region_is_skipped(advantage, log_ratio):
    online = init_params(SMALL, 0)
    instance = generate_instance(ENV_4, 5)
    actions, current = rollout(online, instance, SAMPLE, 0)
    # p / p_behavior = e for the positive case, 1/e for the negative one
    traj = Trajectory(5, actions, return_online=2e6 + advantage, return_baseline=2e6,
                      behavior_log_prob=current - log_ratio)
    before = online.vector()

    loss = update_step(online, [traj], make_optimizer(online, small_train_config()), ENV_4, 1e-6, clip_ratio=0.2)

    assert loss == 0.0
    np.testing.assert_array_equal(online.vector(), before)

    unclipped = update_step(online, [traj], make_optimizer(online, small_train_config()), ENV_4, 1e-6)
    assert unclipped == pytest.approx(-np.sign(advantage) * current, rel=1e-12)
    assert not np.array_equal(online.vector(), before)


def test_clipping_keeps_fresh_trajectories():
    online = init_params(SMALL, 2)
    batch = [
        dataclasses.replace(run_episode(online, online, ENV_4, s, s), return_online=4e6, return_baseline=1e6 * s)
        for s in range(3)
    ]
    fresh = copy_params(online)

    clipped = update_step(online, batch, make_optimizer(online, small_train_config()), ENV_4, 1e-6, clip_ratio=0.2)
    plain = update_step(fresh, batch, make_optimizer(fresh, small_train_config()), ENV_4, 1e-6)

    assert clipped == pytest.approx(plain, rel=1e-12)
    np.testing.assert_array_equal(online.vector(), fresh.vector())


def test_sync_baseline():
    online, baseline = init_params(SMALL, 0), init_params(SMALL, 1)
    actions = rollout(online, generate_instance(ENV_4, 0), SAMPLE, 0)[0]

    assert sync_baseline(online, baseline, Trajectory(0, actions, 5.0, 5.0)) is baseline
    assert sync_baseline(online, baseline, Trajectory(0, actions, 4.0, 5.0)) is baseline

    synced = sync_baseline(online, baseline, Trajectory(0, actions, 6.0, 5.0))
    assert synced is not online
    np.testing.assert_array_equal(synced.vector(), online.vector())


def test_validation_errors_are_bracketed():
    baseline = init_params(SMALL, 0)
    oracle = precompute_oracle(ENV_4, [1, 2, 3], budget=10 ** 7)
    report = validate(baseline, ENV_4, [1, 2, 3], oracle, threshold=1.5, episode=7)

    assert report.episode == 7
    assert [row.seed for row in report.rows] == [1, 2, 3]
    for row in report.rows:
        assert row.r_max == oracle[row.seed].r_max
        assert -1e-9 <= row.error <= 1 + 1e-9
        assert row.error == pytest.approx((row.r_max - row.r_bl) / (row.r_max - row.r_min))
    assert report.passed

    strict = validate(baseline, ENV_4, [1, 2, 3], oracle, threshold=-1.0)
    assert not strict.passed


@pytest.mark.parametrize("r_max,r_min", [(2e7, 1e7), (1e7, 1e7)])
def test_infeasible_baseline_counts_as_worst(r_max, r_min):
    env = EnvConfig(n_users=4, p_t=1e-12)
    arch = Architecture.for_env("fully_connected", (8,), env)
    oracle = {1: SearchResult(r_max, r_min, (0, 0, 1, 1), (0, 1, 0, 1), 6, 0)}

    report = validate(init_params(arch, 0), env, [1], oracle, threshold=0.05)

    assert report.rows[0].r_bl == 0.0
    assert report.rows[0].error == 1.0
    assert not report.passed


def test_no_episodes():
    result = train(ENV_4, small_train_config(max_episodes=0), master_seed=0, arch=SMALL)

    assert not result.converged
    assert result.episodes_run == 0
    assert result.metrics.episodes == [] and result.metrics.validations == []
    np.testing.assert_array_equal(result.baseline.vector(), result.online.vector())


def test_two_users_converge_at_first_validation():
    env = EnvConfig(n_users=2)
    arch = Architecture.for_env("fully_connected", (8,), env)
    result = train(env, small_train_config(val_every=3, max_episodes=50), master_seed=1, arch=arch)

    assert result.converged
    assert result.episodes_run == 3
    assert len(result.metrics.validations) == 1
    assert result.metrics.validations[0].max_error == 0.0


def test_metrics_stream():
    result = train(ENV_4, small_train_config(**NEVER_CONVERGE), master_seed=3, arch=SMALL)
    rows = result.metrics.episodes

    assert [row.episode for row in rows] == list(range(1, 21))
    assert all(row.synced == (row.r_online > row.r_baseline) for row in rows)
    assert all(row.elapsed_s == 0.0 for row in rows)
    assert [v.episode for v in result.metrics.validations] == [10, 20]


def test_training_is_deterministic(tmp_path):
    first = train(ENV_4, small_train_config(), master_seed=4, arch=SMALL)
    second = train(ENV_4, small_train_config(), master_seed=4, arch=SMALL)

    np.testing.assert_array_equal(first.baseline.vector(), second.baseline.vector())
    pd.testing.assert_frame_equal(first.metrics.episodes_frame(), second.metrics.episodes_frame())

    a = write_metrics(first.metrics, tmp_path / "a")
    b = write_metrics(second.metrics, tmp_path / "b")
    assert a[0].read_bytes() == b[0].read_bytes()
    assert a[1].read_bytes() == b[1].read_bytes()

    other = train(ENV_4, small_train_config(), master_seed=5, arch=SMALL)
    assert not first.metrics.episodes_frame().equals(other.metrics.episodes_frame())


def test_metrics_files_round_trip(tmp_path):
    result = train(ENV_4, small_train_config(max_episodes=10), master_seed=0, arch=SMALL)
    metrics_path, validation_path = write_metrics(result.metrics, tmp_path)

    metrics = pd.read_csv(metrics_path)
    assert list(metrics.columns) == ["episode", "loss", "r_online", "r_baseline", "synced", "elapsed_s", "r_step_sum"]
    pd.testing.assert_frame_equal(metrics, result.metrics.episodes_frame(), check_dtype=False)

    validation = pd.read_csv(validation_path)
    assert list(validation.columns) == ["episode", "seed", "r_max", "r_min", "r_bl", "error"]
    assert len(validation) == 3


def test_training_without_replay_memory():
    result = train(ENV_4, small_train_config(replay_enabled=False, **NEVER_CONVERGE), master_seed=0, arch=SMALL)
    assert result.episodes_run == 20


def test_validation_disabled_above_oracle_budget():
    result = train(ENV_4, small_train_config(oracle_budget=5), master_seed=0, arch=SMALL)
    assert result.metrics.validations == []
    assert not result.converged


@pytest.mark.slow
def test_fixed_instance_converges_to_best_assignment():
    seed = 17
    instance = generate_instance(ENV_4, seed)
    oracle = search(instance, ENV_4)
    arch = Architecture.for_env("fully_connected", (64, 64), ENV_4)

    online = init_params(arch, 0)
    baseline = init_params(arch, 0)
    optimizer = make_optimizer(online, small_train_config(learning_rate=0.001))
    for step in range(2000):
        traj = run_episode(online, baseline, ENV_4, seed, rollout_seed=step)
        update_step(online, [traj], optimizer, ENV_4, reward_scale=1e-6)
        baseline = sync_baseline(online, baseline, traj)

    report = validate(baseline, ENV_4, [seed], {seed: oracle}, threshold=0.05)
    assert report.passed


@pytest.mark.slow
def test_four_users_reach_oracle_accuracy_on_most_master_seeds():
    config = default_run_config(n_users=4, max_episodes=5000)
    assert (config.env.n_features, config.arch.hidden_sizes) == (3, (128, 128))
    assert (config.train.learning_rate, config.train.batch_size) == (0.0005, 40)

    passed = 0
    for master_seed in range(5):
        result = train(config.env, config.train, master_seed, config.arch)
        passed += any(report.passed for report in result.metrics.validations)

    assert passed >= 4
