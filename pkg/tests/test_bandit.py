"""Aggregate-feedback ridge estimation: features, confidence sets, coverage."""

import math

import numpy as np
import pytest
from scipy.linalg import cho_solve

from pocf import (
    Dataset,
    ExplorationPolicy,
    FeedbackKindError,
    GameSpec,
    MixedProfile,
    PocfError,
    Record,
    RidgeEstimator,
    builtin_game,
    builtin_policy,
    check_assumption2,
    co_membership_vector,
    coverage_sample_threshold,
    feature_vector,
    fit_ridge,
    make_game,
    mean_utility,
    one_toggle_policy,
    required_sample_size,
    sample_dataset,
    stacked_true_parameter,
    theoretical_bound_bandit,
    toggle_coverage_constant,
)

F = frozenset

# 2 * sqrt(n^2 k) + sqrt(n^2 k ln(1 + M/n) + 2 ln(4 (n+1) k / delta))
SQRT_BETA_EMPTY = 7.3107820597        # n=2, k=1, delta=0.05, M=0
SQRT_BETA_1E4 = 25.6487337724         # n=3, k=3, delta=0.05, M=1e4
BOUND_1E4 = 117.5238303938            # 4 sqrt(n^2 k beta / (c_act M)), c_act=1/486
THRESHOLD_3_3 = 423.8653893238        # 8 (nk+1) ln((nk+1)/delta) at delta=0.05


def _singletons(n, k):
    return GameSpec(n=n, k=k, action_sets=(tuple(F([l]) for l in range(k)),) * n)


def _bandit_ds(game, rows):
    return Dataset(meta={"n": game.n, "k": game.k, "feedback": "bandit", "M": len(rows)},
                   records=[Record(action=a, bandit=tuple(v)) for a, v in rows])


def _empty_est(game, delta=0.05, M=0):
    nk = game.n * game.k
    return RidgeEstimator(game=game, delta=delta, M=M,
                          grams=np.zeros((game.n, nk, nk)), rhs=np.zeros((game.n, nk)))


# ------------------------------------------------------------------- features

def test_feature_layout_two_agents_one_coalition():
    game = _singletons(2, 1)
    a = (F([0]), F([0]))
    assert co_membership_vector(game, a, 0).tolist() == [1.0, 1.0]
    z = feature_vector(game, a, 0)
    assert z.tolist() == [1.0, 1.0, 0.0, 0.0]
    assert feature_vector(game, a, 1).tolist() == [0.0, 0.0, 1.0, 1.0]


def test_lonely_agent_keeps_only_self_bits():
    game = _singletons(2, 2)
    a = (F([0]), F([1]))
    y = co_membership_vector(game, a, 0)
    assert y.tolist() == [1.0, 0.0, 0.0, 0.0]
    assert int(y.sum()) == len(a[0])


def test_features_reproduce_utilities_against_the_true_parameter():
    rng = np.random.default_rng(0)
    for trial in range(100):
        game = make_game("gaussian", int(rng.integers(2, 5)), int(rng.integers(1, 4)),
                         seed=int(rng.integers(10_000)))
        theta = stacked_true_parameter(game)
        a = game.space.action_at(int(rng.integers(game.space_size)))
        i = int(rng.integers(game.n))
        got = float(feature_vector(game, a, i) @ theta)
        assert got == pytest.approx(mean_utility(game, a, i), abs=1e-10)


# ----------------------------------------------------------------------- fits

def test_empty_fit_identity_covariance():
    game = _singletons(2, 1)
    est = fit_ridge(game, _bandit_ds(game, []), 0.05)
    assert np.array_equal(est.V, np.eye(4))
    assert not est.theta_full.any()
    assert est.sqrt_beta == pytest.approx(SQRT_BETA_EMPTY, abs=1e-9)
    assert est.sqrt_beta == pytest.approx(7.3109, abs=2e-4)
    a = (F([0]), F([0]))
    assert est.estimate(a).tolist() == [0.0, 0.0]
    assert est.bonus(a)[0] == pytest.approx(math.sqrt(2.0) * SQRT_BETA_EMPTY, abs=1e-8)


def test_fitted_covariance_matches_dense_rank_updates():
    game = builtin_game("F-G2")
    ds = sample_dataset(game, builtin_policy("F"), 30, "bandit", 4)
    est = fit_ridge(game, ds, 0.05)

    dim = game.n * game.n * game.k
    v = np.eye(dim)
    b = np.zeros(dim)
    for rec in ds.records:
        for i in range(game.n):
            z = feature_vector(game, rec.action, i)
            v += np.outer(z, z)
            b += z * rec.bandit[i]
    assert np.allclose(est.V, v, atol=1e-12)
    assert np.allclose(est.theta_full, np.linalg.solve(v, b), atol=1e-10)


def test_estimates_are_linear_in_the_fit_target():
    game = _singletons(3, 2)
    ds = sample_dataset(game, ExplorationPolicy.uniform_random(), 40, "bandit", 8)
    est = fit_ridge(game, ds, 0.05)
    tripled = RidgeEstimator(game=game, delta=est.delta, M=est.M,
                             grams=est.grams, rhs=3.0 * est.rhs)
    for a in game.space:
        assert np.allclose(tripled.estimate(a), 3.0 * est.estimate(a), atol=1e-12)


def test_fixed_design_estimates_converge():
    game = make_game("gaussian", 3, 2, seed=14)
    a = game.space.action_at(5)
    pol = ExplorationPolicy.explicit(game, [(a, 1.0)])
    ds = sample_dataset(game, pol, 1000, "bandit", 6)
    est = fit_ridge(game, ds, 0.05)
    for i in range(game.n):
        assert abs(est.estimate(a)[i] - mean_utility(game, a, i)) < 0.1


def test_repeating_an_action_shrinks_its_bonus_like_root_m():
    game = _singletons(2, 2)
    a = (F([0]), F([0]))
    pol = ExplorationPolicy.explicit(game, [(a, 1.0)])
    small = fit_ridge(game, sample_dataset(game, pol, 100, "bandit", 0), 0.05)
    large = fit_ridge(game, sample_dataset(game, pol, 400, "bandit", 0), 0.05)
    ratio = large.bonus(a)[0] / small.bonus(a)[0]
    assert 0.4 <= ratio <= 0.6


def test_zero_feature_has_zero_width():
    game = _singletons(2, 2)
    ds = sample_dataset(game, ExplorationPolicy.uniform_random(), 10, "bandit", 1)
    est = fit_ridge(game, ds, 0.05)
    y = np.zeros(game.n * game.k)  # synthetic: real co-membership keeps self bits
    assert float(y @ cho_solve(est._factors[0], y)) == 0.0


def test_tables_match_scalar_evaluation():
    game = builtin_game("F-G1")
    ds = sample_dataset(game, builtin_policy("F"), 60, "bandit", 11)
    est = fit_ridge(game, ds, 0.05)
    space = game.space
    mt = est.mean_tables(space)
    bt = est.bonus_tables(space)
    for s, a in enumerate(space):
        assert np.allclose(mt[s], est.estimate(a), atol=1e-10)
        assert np.allclose(bt[s], est.bonus(a), atol=1e-10)


def test_pairwise_datasets_reduce_to_totals():
    game = make_game("size_gaussian", 3, 2, seed=2)
    semi = sample_dataset(game, ExplorationPolicy.uniform_random(), 50, "semi", 31)
    bandit = sample_dataset(game, ExplorationPolicy.uniform_random(), 50, "bandit", 31)
    est_s = fit_ridge(game, semi, 0.05)
    est_b = fit_ridge(game, bandit, 0.05)
    assert est_s.meta.get("reduced_from") == "semi"
    assert "reduced_from" not in est_b.meta
    assert np.allclose(est_s.grams, est_b.grams, atol=1e-12)
    assert np.allclose(est_s.rhs, est_b.rhs, atol=1e-10)

    with pytest.raises(FeedbackKindError):
        fit_ridge(game, Dataset(meta={"feedback": "full"}), 0.05)


def test_serialization_round_trip():
    game = builtin_game("F-G2")
    ds = sample_dataset(game, builtin_policy("F"), 25, "bandit", 3)
    est = fit_ridge(game, ds, 0.05)
    back = RidgeEstimator.from_dict(game, est.to_dict())
    assert back.M == est.M and back.delta == est.delta
    assert np.allclose(back.V, est.V, atol=1e-9)
    for a in game.space:
        assert np.allclose(back.estimate(a), est.estimate(a), atol=1e-8)
        assert np.allclose(back.bonus(a), est.bonus(a), atol=1e-8)


# ------------------------------------------------------------ action coverage

def test_repeated_action_covers_itself():
    game = _singletons(2, 1)
    a = (F([0]), F([0]))
    est = fit_ridge(game, _bandit_ds(game, [(a, (0.1, 0.1))] * 20), 0.05)
    ok, witness = check_assumption2(est, MixedProfile.point_mass(game, a), 1.0)
    assert ok and witness is None


def test_large_constant_fails_with_an_eigen_witness():
    game = _singletons(2, 2)
    a = (F([0]), F([0]))
    est = fit_ridge(game, _bandit_ds(game, [(a, (0.0, 0.0))] * 5), 0.05)
    ok, witness = check_assumption2(est, MixedProfile.point_mass(game, a), 50.0)
    assert not ok
    assert witness.min_eigenvalue < 0
    # the uncovered direction is a real deviation of the witness agent
    assert witness.deviation in game.action_sets[witness.agent]


def test_psd_verdict_agrees_with_random_quadratic_forms():
    game = builtin_game("F-G1")
    ds = sample_dataset(game, builtin_policy("F"), 80, "bandit", 19)
    est = fit_ridge(game, ds, 0.05)
    anchor = MixedProfile.point_mass(game, (F([0, 1]), F([0, 1]), F([2])))
    c_act = toggle_coverage_constant(game.n, game.k)
    ok, _ = check_assumption2(est, anchor, c_act)
    from pocf.bandit import _deviation_second_moment

    rng = np.random.default_rng(0)
    if ok:
        for i in range(game.n):
            for alt in game.action_sets[i]:
                gap = est.grams[i] - est.M * c_act * _deviation_second_moment(est, anchor, i, alt)
                for _ in range(200):
                    x = rng.normal(size=gap.shape[0])
                    assert x @ gap @ x >= -1e-6 * (x @ x)


def test_toggle_policy_support_and_constant():
    import itertools

    power = tuple(F(c) for r in (1, 2, 3)
                  for c in itertools.combinations(range(3), r))
    game = GameSpec(n=3, k=3, action_sets=(power,) * 3)
    a_star = (F([0, 1]),) * 3
    pol = one_toggle_policy(game, a_star)

    # anchor plus one toggle per agent-coalition pair
    assert len(pol.support) == game.n * game.k + 1
    assert all(w == pytest.approx(1 / 10) for w in pol.weights)
    assert pol.support[0] == a_star
    for a in pol.support[1:]:
        flips = [i for i in range(3) if a[i] != a_star[i]]
        assert len(flips) == 1
        assert len(a[flips[0]] ^ a_star[flips[0]]) == 1

    assert toggle_coverage_constant(3, 3) == pytest.approx(1.0 / 486.0)
    assert coverage_sample_threshold(3, 3, 0.05) == pytest.approx(THRESHOLD_3_3, abs=1e-6)

    thin = GameSpec(n=2, k=2, action_sets=((F([0]), F([0, 1])),) * 2)
    with pytest.raises(PocfError):
        one_toggle_policy(thin, (F([0]), F([0, 1])))


# -------------------------------------------------------------------- bounds

def test_bound_frozen_values():
    game = _singletons(3, 3)
    est = _empty_est(game, M=10_000)
    assert est.sqrt_beta == pytest.approx(SQRT_BETA_1E4, abs=1e-9)
    got = theoretical_bound_bandit(3, 3, est.beta, 1.0 / 486.0, 10_000)
    assert got == pytest.approx(BOUND_1E4, abs=1e-6)


def test_bound_scaling_and_required_samples():
    beta = 30.0
    b1 = theoretical_bound_bandit(2, 2, beta, 0.01, 500)
    b4 = theoretical_bound_bandit(2, 2, beta, 0.01, 2000)
    assert b4 == pytest.approx(b1 / 2.0)

    assert math.isinf(required_sample_size(2, 2, beta, 0.01, eps=0.1, eps_opt=0.1))
    assert math.isinf(required_sample_size(2, 2, beta, 0.01, eps=0.05, eps_opt=0.1))
    m = required_sample_size(2, 2, beta, 0.01, eps=0.5)
    assert m == pytest.approx(16 * 4 * 2 * beta / (0.01 * 0.25))
    # the bound at the required size meets the target
    assert theoretical_bound_bandit(2, 2, beta, 0.01, math.ceil(m)) <= 0.5 + 1e-9
    assert theoretical_bound_bandit(2, 2, beta, 0.01, math.ceil(m / 2)) > 0.5

    with pytest.raises(PocfError):
        theoretical_bound_bandit(2, 2, -1.0, 0.01, 500)
