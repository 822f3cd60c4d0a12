import numpy as np
import pytest

from noma_drl.config.run_config import EnvConfig
from noma_drl.environment.episode import (
    Action,
    apply_action,
    assignment_from_actions,
    build_state,
    legal_mask,
    replay_actions,
    reset,
    step_reward,
)
from noma_drl.environment.network import generate_instance, instance_to_frame, noise_power
from noma_drl.exceptions import IllegalAction
from noma_drl.jra.evaluator import evaluate_assignment


@pytest.fixture
def env():
    return EnvConfig(n_users=4)


@pytest.fixture
def instance(env):
    return generate_instance(env, seed=3)


def test_instance_is_reproducible(env):
    a = generate_instance(env, 11)
    b = generate_instance(env, 11)
    c = generate_instance(env, 12)

    np.testing.assert_array_equal(a.cnr, b.cnr)
    np.testing.assert_array_equal(a.distances, b.distances)
    assert not np.array_equal(a.cnr, c.cnr)


def test_instance_ranges(env):
    instance = generate_instance(env, 5)

    assert instance.cnr.shape == (4, 2)
    assert instance.n_users == 4 and instance.n_channels == 2
    assert ((instance.distances >= env.d_min) & (instance.distances <= env.d_max)).all()
    assert (instance.cnr > 0).all()
    assert instance.b_c == pytest.approx(2.5e6)


def test_cnr_formula(env):
    instance = generate_instance(env, 8)
    expected = (instance.fading * instance.distances[:, None] ** -env.alpha) ** 2 / noise_power(env)
    np.testing.assert_allclose(instance.cnr, expected, rtol=1e-12)


def test_noise_power():
    # -170 dBm/Hz = 1e-20 W/Hz over 2.5 MHz
    assert noise_power(EnvConfig(n_users=4)) == pytest.approx(2.5e-14, rel=1e-12)


def test_fading_has_unit_mean_power():
    env = EnvConfig(n_users=200)
    power = np.mean([np.mean(generate_instance(env, s).fading ** 2) for s in range(20)])
    assert power == pytest.approx(1.0, abs=0.02)


def test_instance_frame(instance):
    frame = instance_to_frame(instance)

    assert list(frame.columns) == ["seed", "user", "channel", "distance_m", "fading", "cnr"]
    assert len(frame) == 8
    row = frame[(frame.user == 2) & (frame.channel == 1)].iloc[0]
    assert row.cnr == instance.cnr[2, 1]
    assert row.distance_m == instance.distances[2]


def test_fresh_episode_mask(instance):
    state = reset(instance)
    assert legal_mask(state).all()
    assert state.step == 0 and not state.is_terminal


def test_apply_action_returns_new_state(instance):
    state = reset(instance)
    nxt = apply_action(state, Action(1, 0))

    assert state.assigned_channel == (None,) * 4
    assert nxt.assigned_channel[1] == 0
    assert nxt.channel_count == (1, 0)
    assert not legal_mask(nxt)[1].any()


def test_full_channel_is_masked(instance):
    state = replay_actions(instance, [Action(0, 0), Action(1, 0)])
    mask = legal_mask(state)

    assert not mask[:, 0].any()
    assert mask[2:, 1].all()
    with pytest.raises(IllegalAction):
        apply_action(state, Action(2, 0))


@pytest.mark.parametrize("action", [Action(0, 0), Action(4, 0), Action(1, 2), Action(-1, 0)])
def test_illegal_actions(instance, action):
    state = apply_action(reset(instance), Action(0, 1))
    with pytest.raises(IllegalAction):
        apply_action(state, action)


def test_episode_ends_after_n_steps(instance):
    state = replay_actions(instance, [Action(0, 1), Action(3, 0), Action(2, 1), Action(1, 0)])

    assert state.is_terminal
    np.testing.assert_array_equal(state.assignment(), [1, 0, 1, 0])
    assert not legal_mask(state).any()


def test_assignment_of_partial_state_is_refused(instance):
    with pytest.raises(IllegalAction):
        apply_action(reset(instance), Action(0, 0)).assignment()


def test_state_tensor_features(instance):
    state = reset(instance)
    tensor = build_state(state, 3)

    assert tensor.shape == (4, 2, 3)
    np.testing.assert_allclose(tensor[:, :, 0], np.log10(instance.cnr) / 10)
    np.testing.assert_allclose(tensor[:, 0, 1], instance.distances / instance.d_max)
    assert (tensor[:, :, 2] == 0).all()

    after = build_state(apply_action(state, Action(2, 0)), 3)
    assert (after[:, 0, 2] == 0.5).all()
    assert (after[:, 1, 2] == 0).all()


@pytest.mark.parametrize("n_features", [1, 2])
def test_smaller_feature_sets(instance, n_features):
    tensor = build_state(reset(instance), n_features)
    assert tensor.shape == (4, 2, n_features)
    assert np.isfinite(tensor).all()


def test_bad_feature_count(instance):
    with pytest.raises(ValueError):
        build_state(reset(instance), 4)


def test_assignment_from_actions():
    actions = [Action(2, 0), Action(0, 1), Action(1, 0), Action(3, 1)]
    np.testing.assert_array_equal(assignment_from_actions(actions, 4), [1, 0, 0, 1])
    with pytest.raises(IllegalAction):
        assignment_from_actions(actions[:3], 4)
    with pytest.raises(IllegalAction):
        assignment_from_actions(actions + [Action(2, 1)], 4)


def test_step_rewards_match_sum_rate_when_strong_user_goes_first(env, instance):
    actions = []
    for k, users in enumerate(([0, 1], [2, 3])):
        strong, weak = sorted(users, key=lambda u: -instance.cnr[u, k])
        actions += [Action(strong, k), Action(weak, k)]
    state = replay_actions(instance, actions)
    allocation = evaluate_assignment(instance, state.assignment(), env)

    total = 0.0
    state = reset(instance)
    for action in actions:
        total += step_reward(state, action, allocation)
        state = apply_action(state, action)

    assert total == pytest.approx(allocation.sum_rate, rel=1e-12)
