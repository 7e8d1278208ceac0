"""Exploration policies, size densities, dataset sampling and serialization."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest

from pocf import (
    Dataset,
    DatasetFormatError,
    ExplorationPolicy,
    GameSpec,
    MixedProfile,
    PocfError,
    Record,
    builtin_game,
    builtin_policy,
    coalition_size_densities,
    coalition_size_density,
    game_fingerprint,
    game_from_fingerprint,
    load_game,
    make_game,
    mean_utilities,
    read_dataset,
    sample_dataset,
    save_game,
    table_game,
    write_dataset,
)

F = frozenset


def _singleton_game(n: int, k: int) -> GameSpec:
    return GameSpec(n=n, k=k, action_sets=(tuple(F([l]) for l in range(k)),) * n)


def _semi_lookup(rec: Record) -> dict:
    return {(i, j, l): v for i, j, l, v in rec.semi}


# ------------------------------------------------------------------- policies

def test_uniform_policy_covers_the_whole_space() -> None:
    game = _singleton_game(2, 2)
    pol = ExplorationPolicy.uniform_random()
    pol.validate(game)
    for a in game.space:
        assert pol.prob(game, a) == pytest.approx(1 / 4)

    rng = np.random.default_rng(0)
    counts: dict = {}
    m = 10_000
    for _ in range(m):
        a = pol.sample(game, rng)
        counts[a] = counts.get(a, 0) + 1
    sigma = math.sqrt(0.25 * 0.75 / m)
    for a in game.space:
        assert abs(counts.get(a, 0) / m - 0.25) <= 4 * sigma


def test_one_rand_profile_shape() -> None:
    game = builtin_game("H-mixed(3)")
    pol = ExplorationPolicy.one_rand()
    phi = pol.to_profile(game)
    assert np.allclose(phi.probs[0], [1 / 3, 1 / 3, 1 / 3])
    for i in (1, 2):
        assert phi.probs[i].tolist() == [0.0, 1.0, 0.0]

    lonely = GameSpec(n=2, k=1, action_sets=((F([0]),), (F([0]),)))
    with pytest.raises(PocfError):
        pol.validate(lonely)


def test_builtin_policies_support_and_weights() -> None:
    d = builtin_policy("D")
    assert len(d.support) == 36
    assert all(w == pytest.approx(1 / 36) for w in d.weights)
    sizes = {sum(1 for ai in a if 0 in ai) for a in d.support}
    assert sizes == {2, 4, 5}

    f = builtin_policy("F")
    assert len(f.support) == 10
    assert all(w == pytest.approx(1 / 10) for w in f.weights)


def test_explicit_policy_validation() -> None:
    game = _singleton_game(2, 2)
    with pytest.raises(PocfError):
        ExplorationPolicy.explicit(game, [((F([0]), F([0])), 0.7)])  # mass != 1
    with pytest.raises(PocfError):
        ExplorationPolicy.explicit(game, [((F([0, 1]), F([0])), 1.0)])  # not in A_1


# -------------------------------------------------------------- size densities

def test_singleton_uniform_density() -> None:
    game = _singleton_game(2, 2)
    d = coalition_size_densities(game, MixedProfile.uniform(game), 0)
    assert d.tolist() == pytest.approx([0.25, 0.5, 0.25])
    assert d.sum() == pytest.approx(1.0)


def test_point_mass_density_is_an_indicator() -> None:
    game = builtin_game("F-G1")
    a = (F([0, 1]), F([2]), F([0]))
    phi = MixedProfile.point_mass(game, a)
    d = coalition_size_densities(game, phi, 0)
    assert d[2] == 1.0 and d.sum() == 1.0
    assert coalition_size_density(game, phi, 2, 1) == 1.0
    assert coalition_size_density(game, phi, 2, 7) == 0.0  # out of range


def test_builtin_policy_densities() -> None:
    game = builtin_game("D-G1")
    pol = builtin_policy("D")
    d1 = coalition_size_densities(game, pol, 0)
    assert d1[2] == pytest.approx(15 / 36)
    assert d1[4] == pytest.approx(15 / 36)
    assert d1[5] == pytest.approx(6 / 36)
    assert d1[3] == 0.0 and d1[6] == 0.0
    d2 = coalition_size_densities(game, pol, 1)
    assert d2[4] == pytest.approx(15 / 36)
    assert d2[2] == pytest.approx(15 / 36)
    assert d2[1] == pytest.approx(6 / 36)


def test_monte_carlo_density_matches_exact() -> None:
    game = builtin_game("H-mixed(3)")
    pol = ExplorationPolicy.one_rand()
    exact = coalition_size_densities(game, pol, 4)
    freq, err = coalition_size_densities(game, pol, 4, mode="monte_carlo",
                                         mc_samples=20_000, rng=np.random.default_rng(1))
    assert np.all(np.abs(freq - exact) <= 4 * err + 1e-9)


def test_density_label_bounds() -> None:
    game = _singleton_game(2, 2)
    with pytest.raises(PocfError):
        coalition_size_densities(game, MixedProfile.uniform(game), 2)


# ------------------------------------------------------------------- sampling

def test_empty_dataset_is_valid(tmp_path: Path) -> None:
    game = builtin_game("D-G1")
    ds = sample_dataset(game, builtin_policy("D"), 0, "semi", 0)
    assert len(ds) == 0
    assert ds.meta["M"] == 0
    path = tmp_path / "empty.jsonl"
    write_dataset(ds, path)
    assert len(path.read_text().splitlines()) == 1
    assert read_dataset(path) == ds


def test_semi_records_carry_every_comember_pair() -> None:
    game = builtin_game("D-G1")
    ds = sample_dataset(game, builtin_policy("D"), 40, "semi", 7)
    assert ds.meta["feedback"] == "semi"
    for rec in ds.records:
        seen = set()
        for i, j, l, v in rec.semi:
            assert i < j and l in rec.action[i] and l in rec.action[j]
            assert math.isfinite(v) and abs(v) <= 1.0
            seen.add((i, j, l))
        want = {(i, j, l)
                for l in range(game.k)
                for i in range(game.n) for j in range(i + 1, game.n)
                if l in rec.action[i] and l in rec.action[j]}
        assert seen == want


def test_deterministic_game_reproduces_its_means() -> None:
    game = builtin_game("D-G2")
    ds = sample_dataset(game, builtin_policy("D"), 25, "semi", 3)
    cube = game.mean_cube()
    for rec in ds.records:
        sizes = [sum(1 for ai in rec.action if l in ai) for l in range(game.k)]
        for (i, j, l), v in _semi_lookup(rec).items():
            assert v == cube[l, i, j, sizes[l]]

    bd = sample_dataset(game, builtin_policy("D"), 25, "bandit", 3)
    for rec in bd.records:
        assert np.allclose(rec.bandit, mean_utilities(game, rec.action))


def test_sampling_is_seed_deterministic() -> None:
    game = make_game("gaussian", 3, 2, seed=5)
    pol = ExplorationPolicy.uniform_random()
    a = sample_dataset(game, pol, 30, "bandit", 11)
    b = sample_dataset(game, pol, 30, "bandit", 11)
    c = sample_dataset(game, pol, 30, "bandit", 12)
    assert a == b
    assert a != c


def test_feedback_kind_is_checked() -> None:
    game = builtin_game("D-G1")
    with pytest.raises(PocfError):
        sample_dataset(game, builtin_policy("D"), 5, "full", 0)
    with pytest.raises(PocfError):
        sample_dataset(game, builtin_policy("D"), -1, "semi", 0)


# -------------------------------------------------------------- serialization

def test_semibandit_round_trip(tmp_path: Path) -> None:
    game = make_game("size_gaussian", 4, 2, seed=9)
    ds = sample_dataset(game, ExplorationPolicy.uniform_random(), 100, "semi", 21)
    path = tmp_path / "ds.jsonl"
    write_dataset(ds, path)
    assert read_dataset(path) == ds


def test_bandit_round_trip_and_disk_layout(tmp_path: Path) -> None:
    game = builtin_game("F-G2")
    ds = sample_dataset(game, builtin_policy("F"), 12, "bandit", 2)
    path = tmp_path / "ds.jsonl"
    write_dataset(ds, path)
    assert read_dataset(path) == ds

    lines = path.read_text().splitlines()
    head = json.loads(lines[0])
    assert head["meta"]["game"] == {"kind": "builtin", "name": "F-G2"}
    row = json.loads(lines[1])
    for ai in row["a"]:  # one-based labels on disk
        assert all(1 <= l <= 3 for l in ai)
    assert len(row["fb"]["bandit"]) == 3


def test_read_errors_name_the_line(tmp_path: Path) -> None:
    game = builtin_game("D-G1")
    ds = sample_dataset(game, builtin_policy("D"), 4, "semi", 0)
    path = tmp_path / "ds.jsonl"
    write_dataset(ds, path)
    lines = path.read_text().splitlines()

    bad = tmp_path / "bad.jsonl"
    bad.write_text("\n".join(lines[:2] + ["{oops"] + lines[3:]) + "\n")
    with pytest.raises(DatasetFormatError) as exc:
        read_dataset(bad)
    assert exc.value.line == 3

    trunc = tmp_path / "trunc.jsonl"
    trunc.write_text("\n".join(lines[:1] + [lines[1][: len(lines[1]) // 2]]) + "\n")
    with pytest.raises(DatasetFormatError) as exc:
        read_dataset(trunc)
    assert exc.value.line == 2

    nofb = tmp_path / "nofb.jsonl"
    nofb.write_text(lines[0] + "\n" + json.dumps({"a": [[1]] * 6}) + "\n")
    with pytest.raises(DatasetFormatError):
        read_dataset(nofb)

    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    with pytest.raises(DatasetFormatError) as exc:
        read_dataset(empty)
    assert exc.value.line == 1


# ---------------------------------------------------------------- game files

def test_game_file_round_trips(tmp_path: Path) -> None:
    cases = [
        builtin_game("D-G1"),
        make_game("size_uniform", 3, 3, seed=4),
        make_game("mixed_effects", 3, 5),
        table_game(2, 2, [[[1], [2]], [[1], [2]]], [[1, 2, 1, 2, 0.25]]),
    ]
    for idx, game in enumerate(cases):
        path = tmp_path / f"game{idx}.json"
        save_game(game, path)
        back = load_game(path)
        assert back.n == game.n and back.k == game.k
        assert back.action_sets == game.action_sets
        assert np.array_equal(back.mean_cube(), game.mean_cube())


def test_fingerprint_round_trips() -> None:
    for game in (builtin_game("H-mixed(4)"), make_game("gaussian", 3, 2, seed=1),
                 table_game(2, 1, [[[1]], [[1]]], [[1, 2, 1, None, -0.5]])):
        back = game_from_fingerprint(game_fingerprint(game))
        assert np.array_equal(back.mean_cube(), game.mean_cube())

    custom = GameSpec(n=2, k=1, action_sets=((F([0]),),) * 2)
    with pytest.raises(PocfError):
        game_from_fingerprint(game_fingerprint(custom))


def test_unsaveable_and_malformed_game_files(tmp_path: Path) -> None:
    custom = GameSpec(n=2, k=1, action_sets=((F([0]),),) * 2)
    with pytest.raises(PocfError):
        save_game(custom, tmp_path / "nope.json")

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 2, "k": 1}))
    with pytest.raises(PocfError):
        load_game(bad)
