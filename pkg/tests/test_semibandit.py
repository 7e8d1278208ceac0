"""Pairwise-feedback estimation: counts, bonuses, coverage, gap bound."""

import math

import numpy as np
import pytest

from pocf import (
    Dataset,
    ExplorationPolicy,
    FeedbackKindError,
    GameSpec,
    MixedProfile,
    PocfError,
    Record,
    SemiBanditEstimator,
    builtin_game,
    builtin_policy,
    check_assumption1,
    coalition_size_coefficient,
    fit_semibandit,
    make_game,
    mean_utilities,
    sample_dataset,
    theoretical_bound_semibandit,
)

F = frozenset

# sqrt(2 * ln(4 * (n+1) * k / delta)) at n=3, k=2, delta=0.05, one observation
BONUS_N1 = 3.5948485855
# full bound prefactor at n=6, k=2, c=3, delta=0.05 and its value at M=1e4
F_MIXED = 189428.60780905
BOUND_AT_1E4 = 1894.28607809
F_PURE = 81183.68906102


def _game(n, k):
    return GameSpec(n=n, k=k, action_sets=(tuple(F([l]) for l in range(k)),) * n)


def _semi_ds(game, rows):
    return Dataset(meta={"n": game.n, "k": game.k, "feedback": "semi", "M": len(rows)},
                   records=[Record(action=a, semi=tuple(semi)) for a, semi in rows])


def test_single_observation_fit():
    game = _game(2, 2)
    a = (F([0]), F([0]))
    est = fit_semibandit(game, _semi_ds(game, [(a, [(0, 1, 0, 0.5)])]), 0.1)
    assert est.counts[0, 0, 1] == 1 and est.counts[0, 1, 0] == 1
    assert est.means[0, 0, 1] == 0.5
    assert est.estimate(a).tolist() == [0.5, 0.5]


def test_empty_fit_is_all_zero():
    game = _game(3, 2)
    est = fit_semibandit(game, _semi_ds(game, []), 0.05)
    assert not est.counts.any()
    for a in game.space:
        assert est.estimate(a).tolist() == [0.0, 0.0, 0.0]


def test_two_observations_average():
    game = _game(2, 2)
    a = (F([0]), F([0]))
    ds = _semi_ds(game, [(a, [(0, 1, 0, 0.2)]), (a, [(0, 1, 0, 0.6)])])
    est = fit_semibandit(game, ds, 0.05)
    assert est.counts[0, 0, 1] == 2
    assert est.means[0, 0, 1] == pytest.approx(0.4)
    assert est.estimate(a).tolist() == pytest.approx([0.4, 0.4])


def test_fit_rejects_bandit_feedback():
    game = _game(2, 2)
    ds = Dataset(meta={"feedback": "bandit", "M": 1},
                 records=[Record(action=(F([0]), F([0])), bandit=(0.5, 0.5))])
    with pytest.raises(FeedbackKindError):
        fit_semibandit(game, ds, 0.05)


def test_isolated_agent_has_zero_estimate_and_bonus():
    game = _game(2, 2)
    ds = _semi_ds(game, [((F([0]), F([0])), [(0, 1, 0, 0.4)])])
    est = fit_semibandit(game, ds, 0.05)
    split = (F([0]), F([1]))
    assert est.estimate(split).tolist() == [0.0, 0.0]
    assert est.bonus(split).tolist() == [0.0, 0.0]
    up, lo = est.ucb_lcb(split)
    assert up.tolist() == lo.tolist() == [0.0, 0.0]


def test_bonus_term_frozen_value():
    game = _game(3, 2)
    a = (F([0]), F([0]), F([1]))
    est = fit_semibandit(game, _semi_ds(game, [(a, [(0, 1, 0, 0.1)])]), 0.05)
    b = est.bonus(a)
    assert b[0] == pytest.approx(BONUS_N1, abs=1e-9)
    assert b[1] == pytest.approx(BONUS_N1, abs=1e-9)
    assert b[2] == 0.0  # alone in coalition 2
    assert BONUS_N1 == pytest.approx(math.sqrt(2 * math.log(4 * 4 * 2 / 0.05)), abs=1e-9)


def test_quadrupled_count_halves_the_term():
    game = _game(2, 1)
    a = (F([0]), F([0]))
    one = fit_semibandit(game, _semi_ds(game, [(a, [(0, 1, 0, 0.0)])]), 0.05)
    four = fit_semibandit(game, _semi_ds(game, [(a, [(0, 1, 0, 0.0)])] * 4), 0.05)
    assert four.bonus(a)[0] == one.bonus(a)[0] / 2.0


def test_unseen_pairs_use_the_count_floor():
    # N = 0 enters the term as max(N, 1): same width as one observation
    game = _game(2, 1)
    a = (F([0]), F([0]))
    empty = fit_semibandit(game, _semi_ds(game, []), 0.05)
    one = fit_semibandit(game, _semi_ds(game, [(a, [(0, 1, 0, 0.3)])]), 0.05)
    assert empty.bonus(a)[0] == one.bonus(a)[0]
    up, lo = empty.ucb_lcb(a)
    assert up[0] == -lo[0] == empty.bonus(a)[0]


def test_confidence_bounds_are_estimate_plus_minus_bonus():
    game = _game(2, 2)
    a = (F([0]), F([0]))
    est = fit_semibandit(game, _semi_ds(game, [(a, [(0, 1, 0, 0.4)])]), 0.05)
    t = est.bonus(a)[0]
    up, lo = est.ucb_lcb(a)
    assert up[0] == pytest.approx(0.4 + t) and lo[0] == pytest.approx(0.4 - t)


def test_bonus_shrinks_as_data_grows():
    game = make_game("gaussian", 3, 2, seed=6)
    ds = sample_dataset(game, ExplorationPolicy.uniform_random(), 60, "semi", 13)
    actions = list(game.space)
    prev = None
    for m in (0, 15, 30, 60):
        est = fit_semibandit(game, Dataset(meta=ds.meta, records=ds.records[:m]), 0.05)
        widths = np.array([est.bonus(a) for a in actions])
        if prev is not None:
            assert np.all(widths <= prev + 1e-12)
        prev = widths


def test_tables_match_scalar_evaluation():
    game = make_game("size_uniform", 3, 2, seed=3)
    ds = sample_dataset(game, ExplorationPolicy.uniform_random(), 50, "semi", 17)
    est = fit_semibandit(game, ds, 0.05)
    space = game.space
    mt = est.mean_tables(space)
    bt = est.bonus_tables(space)
    for s, a in enumerate(space):
        assert np.allclose(mt[s], est.estimate(a), atol=1e-12)
        assert np.allclose(bt[s], est.bonus(a), atol=1e-12)


def test_bonus_covers_true_means_on_one_draw():
    game = make_game("gaussian", 3, 2, seed=1)
    ds = sample_dataset(game, ExplorationPolicy.uniform_random(), 400, "semi", 5)
    est = fit_semibandit(game, ds, 0.05)
    for a in game.space:
        d = mean_utilities(game, a)
        assert np.all(np.abs(d - est.estimate(a)) <= est.bonus(a) + 1e-12)


def test_serialization_round_trip():
    game = make_game("gaussian", 3, 2, seed=2)
    ds = sample_dataset(game, ExplorationPolicy.uniform_random(), 35, "semi", 9)
    est = fit_semibandit(game, ds, 0.05)
    back = SemiBanditEstimator.from_dict(game, est.to_dict())
    assert back.delta == est.delta
    assert np.array_equal(back.counts, est.counts)
    assert np.allclose(back.means, est.means, atol=1e-15)
    for a in game.space:
        assert np.allclose(back.bonus(a), est.bonus(a), atol=1e-12)


# ----------------------------------------------------------- coverage checks

def test_size_coefficient_on_the_singleton_example():
    game = _game(2, 2)
    pol = ExplorationPolicy.uniform_random()
    anchor = MixedProfile.point_mass(game, (F([0]), F([0])))
    assert coalition_size_coefficient(game, pol, anchor) == pytest.approx(4.0)
    ok, witness = check_assumption1(game, pol, anchor)
    assert ok and witness is None


def test_point_mass_policy_leaves_sizes_uncovered():
    game = _game(2, 2)
    a = (F([0]), F([0]))
    pol = ExplorationPolicy.explicit(game, [(a, 1.0)])
    anchor = MixedProfile.point_mass(game, a)
    c = coalition_size_coefficient(game, pol, anchor)
    assert math.isinf(c)
    ok, witness = check_assumption1(game, pol, anchor)
    assert not ok
    assert witness.size == 1
    assert "never produces" in str(witness)


def test_uniform_policy_passes_everywhere():
    for game in (make_game("gaussian", 3, 3, seed=2), builtin_game("F-G1"),
                 builtin_game("H-mixed(3)")):
        anchor = MixedProfile.point_mass(game, next(iter(game.space)))
        ok, witness = check_assumption1(game, ExplorationPolicy.uniform_random(), anchor)
        assert ok and witness is None


def test_pair_policy_misses_the_grand_coalition():
    game = builtin_game("D-G1")
    grand = MixedProfile.point_mass(game, (F([0]),) * 6)
    ok, witness = check_assumption1(game, builtin_policy("D"), grand)
    assert not ok
    assert witness.coalition == 0 and witness.size == 6


def test_one_rand_covers_the_mixed_effects_game():
    game = builtin_game("H-mixed(4)")
    anchor = MixedProfile.point_mass(game, (F([0, 2, 4]),) * 4)
    pol = ExplorationPolicy.one_rand()
    assert coalition_size_coefficient(game, pol, anchor) == pytest.approx(3.0)
    assert check_assumption1(game, pol, anchor) == (True, None)


# -------------------------------------------------------------------- bounds

def test_bound_frozen_values():
    assert theoretical_bound_semibandit(6, 2, 3.0, 0.05, 1) == pytest.approx(F_MIXED, abs=1e-6)
    assert theoretical_bound_semibandit(6, 2, 3.0, 0.05, 10_000) == pytest.approx(
        BOUND_AT_1E4, abs=1e-6)
    assert theoretical_bound_semibandit(6, 2, 3.0, 0.05, 1, variant="pure") == pytest.approx(
        F_PURE, abs=1e-6)
    # pure leads with 24kn instead of 8kn(n+1): ratio 3 / (n+1)
    assert F_PURE / F_MIXED == pytest.approx(3 / 7, abs=1e-12)


def test_bound_scaling_and_edges():
    b1 = theoretical_bound_semibandit(4, 2, 2.0, 0.1, 1000)
    b2 = theoretical_bound_semibandit(4, 2, 2.0, 0.1, 2000)
    assert b2 == pytest.approx(b1 / math.sqrt(2.0))
    assert theoretical_bound_semibandit(1, 3, 2.0, 0.1, 50, eps_opt=0.25) == 0.25
    shifted = theoretical_bound_semibandit(4, 2, 2.0, 0.1, 1000, eps_opt=0.5)
    assert shifted == pytest.approx(b1 + 0.5)
    with pytest.raises(PocfError):
        theoretical_bound_semibandit(4, 2, 2.0, 0.0, 1000)
    with pytest.raises(PocfError):
        theoretical_bound_semibandit(4, 2, 2.0, 0.1, 0)
    with pytest.raises(PocfError):
        theoretical_bound_semibandit(4, 2, 2.0, 0.1, 100, variant="exact")
