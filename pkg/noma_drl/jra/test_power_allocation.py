import numpy as np
import pytest

from noma_drl.config.run_config import EnvConfig
from noma_drl.environment.network import generate_instance
from noma_drl.exceptions import BudgetTooSmall, Infeasible, MalformedAssignment
from noma_drl.jra.evaluator import (
    allocate_pairs,
    allocation_to_frame,
    channel_pairs,
    evaluate_assignment,
    random_assignment,
    random_assignment_rate,
)
from noma_drl.jra.power_allocation import ChannelPair, min_budget, pair_rates, rate_general, split_budget
from noma_drl.jra.waterfilling import budgets_for_lambda, solve_budgets

ENV_2 = EnvConfig(n_users=2)
ENV_6 = EnvConfig(n_users=6)
A = ENV_2.rate_factor


def random_pair(seed):
    cnr = generate_instance(ENV_2, seed).cnr[:, 0]
    return ChannelPair.ordered(0, 1, cnr[0], cnr[1], A)


def test_pair_ordering_and_ties():
    pair = ChannelPair.ordered(3, 5, 10.0, 20.0, 4.0)
    assert (pair.user1, pair.user2, pair.gamma1, pair.gamma2) == (5, 3, 20.0, 10.0)

    tie = ChannelPair.ordered(7, 2, 5.0, 5.0, 4.0)
    assert (tie.user1, tie.user2) == (2, 7)

    with pytest.raises(ValueError):
        ChannelPair(1.0, 2.0, 4.0, 4.0)
    with pytest.raises(ValueError):
        ChannelPair(2.0, 1.0, 1.5, 4.0)


@pytest.mark.parametrize("seed", range(100))
def test_split_matches_grid_search(seed):
    pair = random_pair(seed)
    q, b_c = ENV_2.p_t, ENV_2.b_c
    r_req = b_c * ENV_2.r_min

    p1, p2 = split_budget(pair, q)
    r1, r2 = pair_rates(pair, p1, p2, b_c)

    grid = np.linspace(0.0, 0.5, 50_001) * q
    g1 = b_c * np.log2(1 + grid * pair.gamma1)
    g2 = b_c * np.log2(1 + (q - grid) * pair.gamma2 / (1 + grid * pair.gamma2))
    feasible = (g1 >= r_req) & (g2 >= r_req)
    best = np.max((g1 + g2)[feasible])

    assert r1 + r2 == pytest.approx(best, rel=1e-4)
    assert r1 + r2 >= best * (1 - 1e-12)
    assert r1 >= r_req * (1 - 1e-9)
    assert r2 == pytest.approx(r_req, rel=1e-9)
    assert 0 <= p1 <= p2
    assert p1 + p2 == pytest.approx(q, rel=1e-15)


@pytest.mark.parametrize("seed", range(100))
def test_minimum_budget_meets_minimum_rates_exactly(seed):
    pair = random_pair(seed)
    gamma = min_budget(pair)
    r1, r2 = pair_rates(pair, *split_budget(pair, gamma), ENV_2.b_c)
    r_req = ENV_2.b_c * ENV_2.r_min

    assert r1 == pytest.approx(r_req, rel=1e-9)
    assert r2 == pytest.approx(r_req, rel=1e-9)


def test_budget_below_minimum():
    pair = random_pair(0)
    with pytest.raises(BudgetTooSmall):
        split_budget(pair, 0.5 * min_budget(pair))


def test_rate_general_reduces_to_pair_rates():
    pair = ChannelPair(2e6, 3e5, 4.0, 4.0)
    r1, r2 = pair_rates(pair, 1.0, 3.0, 1e6)
    assert rate_general(pair.gamma1, [], 1.0, 1e6) == pytest.approx(r1)
    assert rate_general(pair.gamma2, [1.0], 3.0, 1e6) == pytest.approx(r2)


@pytest.mark.parametrize("seed", range(100))
def test_waterfilling_uses_total_power_at_common_level(seed):
    instance = generate_instance(ENV_6, seed)
    assignment = random_assignment(6, np.random.default_rng(seed))
    pairs = channel_pairs(instance, assignment, ENV_6)
    solved = solve_budgets(pairs, ENV_6.p_t, instance.b_c)

    assert solved.budgets.sum() == pytest.approx(ENV_6.p_t, abs=1e-9 * ENV_6.p_t)
    gammas = np.array([min_budget(p) for p in pairs])
    assert (solved.budgets >= gammas * (1 - 1e-12)).all()

    offsets = np.array([p.a2 / p.gamma1 - p.a2 / p.gamma2 + 1 / p.gamma2 for p in pairs])
    level = instance.b_c / solved.lam
    unclamped = solved.budgets > gammas * (1 + 1e-9)
    np.testing.assert_allclose(solved.budgets[unclamped] + offsets[unclamped], level, rtol=1e-6)


def test_budgets_for_lambda_is_monotone():
    pairs = channel_pairs(generate_instance(ENV_6, 1), np.array([0, 0, 1, 1, 2, 2]), ENV_6)
    b_c = ENV_6.b_c
    assert budgets_for_lambda(pairs, 1e5, b_c).sum() >= budgets_for_lambda(pairs, 1e6, b_c).sum()
    with pytest.raises(ValueError):
        budgets_for_lambda(pairs, 0.0, b_c)


def test_single_channel_takes_all_power():
    allocation = allocate_pairs([random_pair(4)], 12.0, ENV_2.b_c)
    assert allocation.budgets[0] == pytest.approx(12.0, rel=1e-9)


def test_infeasible_total_power():
    pairs = [random_pair(2)]
    with pytest.raises(Infeasible):
        solve_budgets(pairs, 0.5 * min_budget(pairs[0]), ENV_2.b_c)


def test_total_power_exactly_at_minimum():
    pairs = [random_pair(s) for s in range(3)]
    total = sum(min_budget(p) for p in pairs)
    allocation = allocate_pairs(pairs, total, ENV_2.b_c)
    np.testing.assert_allclose(allocation.budgets, [min_budget(p) for p in pairs], rtol=1e-12)


def test_evaluate_assignment_reports_every_channel():
    instance = generate_instance(ENV_6, 9)
    allocation = evaluate_assignment(instance, np.array([2, 0, 1, 0, 2, 1]), ENV_6)

    assert allocation.rates.shape == (3, 2)
    assert allocation.sum_rate == pytest.approx(allocation.rates.sum())
    assert [{p.user1, p.user2} for p in allocation.pairs] == [{1, 3}, {2, 5}, {0, 4}]
    np.testing.assert_allclose(allocation.p1 + allocation.p2, allocation.budgets)

    frame = allocation_to_frame(allocation)
    assert list(frame.columns) == [
        "channel", "user1", "user2", "gamma1", "gamma2", "q", "p1", "p2", "r1", "r2", "sum_rate",
    ]
    assert len(frame) == 3


@pytest.mark.parametrize("assignment", [[0, 0, 1, 1, 2], [0, 0, 0, 1, 2, 2], [0, 0, 1, 1, 2, 3]])
def test_malformed_assignments(assignment):
    with pytest.raises(MalformedAssignment):
        evaluate_assignment(generate_instance(ENV_6, 0), np.array(assignment), ENV_6)


def test_random_assignment_is_balanced():
    rng = np.random.default_rng(0)
    for _ in range(20):
        assert np.bincount(random_assignment(8, rng), minlength=4).tolist() == [2, 2, 2, 2]


def test_random_assignment_rate():
    instance = generate_instance(ENV_6, 2)
    rate = random_assignment_rate(instance, ENV_6, n_draws=20, seed=1)

    assert rate > 0
    assert rate == random_assignment_rate(instance, ENV_6, n_draws=20, seed=1)


def test_random_assignment_rate_all_infeasible():
    env = EnvConfig(n_users=4, p_t=1e-12)
    assert np.isnan(random_assignment_rate(generate_instance(env, 0), env, n_draws=5))


def nested_grid_sum_rate(pairs, p_t, b_c, r_req, points=1001):
    """Best two-channel sum rate over a grid of budget splits and strong-user powers."""
    def channel_best(pair, budgets):
        p1 = budgets[:, None] * np.linspace(0.0, 1.0, points)[None, :]
        p2 = budgets[:, None] - p1
        r1 = b_c * np.log2(1 + p1 * pair.gamma1)
        r2 = b_c * np.log2(1 + p2 * pair.gamma2 / (1 + p1 * pair.gamma2))
        return np.where((r1 >= r_req) & (r2 >= r_req), r1 + r2, -np.inf).max(axis=1)

    first = np.linspace(0.0, 1.0, points) * p_t
    return np.max(channel_best(pairs[0], first) + channel_best(pairs[1], p_t - first))


@pytest.mark.parametrize("seed", range(5))
def test_four_user_sum_rate_matches_nested_grid_search(seed):
    env = EnvConfig(n_users=4)
    instance = generate_instance(env, seed)
    allocation = evaluate_assignment(instance, np.array([0, 1, 0, 1]), env)

    best = nested_grid_sum_rate(allocation.pairs, env.p_t, env.b_c, env.b_c * env.r_min)

    assert allocation.sum_rate >= best * (1 - 1e-12)
    assert allocation.sum_rate == pytest.approx(best, rel=1e-3)


def test_mean_sum_rate_grows_with_total_power():
    assignment = np.array([0, 0, 1, 1, 2, 2])
    means = []
    for p_t in (2.0, 4.0, 8.0, 12.0):
        env = EnvConfig(n_users=6, p_t=p_t)
        instances = [generate_instance(env, seed) for seed in range(10)]
        np.testing.assert_array_equal(instances[0].cnr, generate_instance(ENV_6, 0).cnr)
        means.append(np.mean([evaluate_assignment(inst, assignment, env).sum_rate for inst in instances]))

    assert np.all(np.diff(means) > 0)
