"""Exploration policies, dataset generation, and file formats.

Datasets are JSON-lines files: the first line holds metadata, every further
line one record with its joint action and either per-pair feedback entries
or per-agent totals. All serialized indices are one-based; floats use the
shortest representation that round-trips exactly.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DatasetFormatError, EnumerationBudgetError, PocfError
from .games import (
    ENUMERATION_BUDGET,
    GameSpec,
    JointAction,
    MixedProfile,
    as_action,
    realized_utilities,
    sample_utilities,
    validate_joint_action,
)

FEEDBACK_KINDS = ("semi", "bandit")


@dataclass(frozen=True)
class ExplorationPolicy:
    """Distribution over joint actions used to generate offline data.

    kinds:
      - "uniform_random": product of per-agent uniform distributions.
      - "one_rand": agent 1 plays uniformly at random; every other agent
        deterministically plays the second action inserted into her ordered
        action set.
      - "explicit": a finite support table with probabilities summing to 1.
    """

    kind: str
    support: tuple = None
    weights: tuple = None
    label: str = None

    def __post_init__(self):
        if self.kind not in ("uniform_random", "one_rand", "explicit"):
            raise PocfError(f"unknown policy kind {self.kind!r}")
        if self.kind == "explicit":
            if not self.support or self.weights is None:
                raise PocfError("explicit policy needs a support and weights")
            w = np.asarray(self.weights, dtype=float)
            if (w < 0).any() or abs(w.sum() - 1.0) > 1e-9:
                raise PocfError(f"explicit policy weights sum to {w.sum()!r}, not 1")

    @staticmethod
    def uniform_random() -> "ExplorationPolicy":
        return ExplorationPolicy(kind="uniform_random", label="rand")

    @staticmethod
    def one_rand() -> "ExplorationPolicy":
        return ExplorationPolicy(kind="one_rand", label="one_rand")

    @staticmethod
    def explicit(game: GameSpec, table, label: str = None) -> "ExplorationPolicy":
        support = tuple(validate_joint_action(game, a) for a, _ in table)
        weights = tuple(float(w) for _, w in table)
        return ExplorationPolicy(kind="explicit", support=support, weights=weights, label=label)

    def validate(self, game: GameSpec) -> None:
        if self.kind == "explicit":
            for a in self.support:
                validate_joint_action(game, a)
        elif self.kind == "one_rand":
            for j in range(1, game.n):
                if len(game.action_sets[j]) < 2:
                    raise PocfError(
                        f"one_rand needs a second action for agent {j + 1}"
                    )

    def to_profile(self, game: GameSpec) -> MixedProfile | None:
        """Product-form view, or None for explicit tables."""
        if self.kind == "uniform_random":
            return MixedProfile.uniform(game)
        if self.kind == "one_rand":
            vecs = []
            for i, acts in enumerate(game.action_sets):
                v = np.zeros(len(acts))
                if i == 0:
                    v[:] = 1.0 / len(acts)
                else:
                    v[1] = 1.0
                vecs.append(v)
            return MixedProfile(tuple(vecs))
        return None

    def sample(self, game: GameSpec, rng: np.random.Generator) -> JointAction:
        if self.kind == "explicit":
            idx = rng.choice(len(self.support), p=np.asarray(self.weights))
            return self.support[idx]
        return self.to_profile(game).sample(game, rng)

    def prob(self, game: GameSpec, a) -> float:
        a = validate_joint_action(game, a)
        if self.kind == "explicit":
            total = 0.0
            for b, w in zip(self.support, self.weights):
                if b == a:
                    total += w
            return total
        return self.to_profile(game).prob(game, a)

    def descriptor(self) -> dict:
        out = {"kind": self.kind}
        if self.label:
            out["label"] = self.label
        if self.kind == "explicit":
            out["support_size"] = len(self.support)
        return out


def coalition_size_densities(game: GameSpec, dist, l: int, *, mode: str = "exact",
                             mc_samples: int = 10_000, rng=None):
    """Distribution of |C_l| under a policy or product profile.

    Returns a length n+1 vector in exact mode. Product-form distributions
    use the independent-membership recursion (each agent joins l with her
    own marginal probability), so no enumeration is needed; explicit tables
    are summed directly. Monte Carlo mode returns (vector, standard errors).
    """
    if not 0 <= l < game.k:
        raise PocfError(f"coalition label {l + 1} outside 1..{game.k}")
    if isinstance(dist, ExplorationPolicy) and dist.kind == "explicit":
        if mode == "exact":
            out = np.zeros(game.n + 1)
            for a, w in zip(dist.support, dist.weights):
                size = sum(1 for ai in a if l in ai)
                out[size] += w
            return out
    profile = dist if isinstance(dist, MixedProfile) else dist.to_profile(game)
    if mode == "exact":
        if profile is not None:
            p = np.array([
                sum(profile.probs[i][t] for t, act in enumerate(game.action_sets[i]) if l in act)
                for i in range(game.n)
            ])
            out = np.zeros(game.n + 1)
            out[0] = 1.0
            for q in p:
                out[1:] = out[1:] * (1 - q) + out[:-1] * q
                out[0] *= 1 - q
            return out
        raise PocfError("exact densities need a product-form or explicit distribution")
    if mode != "monte_carlo":
        raise PocfError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    counts = np.zeros(game.n + 1)
    for _ in range(mc_samples):
        a = dist.sample(game, rng) if isinstance(dist, ExplorationPolicy) else dist.sample(game, rng)
        counts[sum(1 for ai in a if l in ai)] += 1
    freq = counts / mc_samples
    err = np.sqrt(freq * (1 - freq) / mc_samples)
    return freq, err


def coalition_size_density(game: GameSpec, dist, l: int, alpha: int, *, mode: str = "exact",
                           mc_samples: int = 10_000, rng=None) -> float:
    """Probability that coalition l has exactly alpha members."""
    if not 0 <= alpha <= game.n:
        return 0.0
    res = coalition_size_densities(game, dist, l, mode=mode, mc_samples=mc_samples, rng=rng)
    if mode == "exact":
        return float(res[alpha])
    return float(res[0][alpha])


@dataclass(frozen=True)
class Record:
    action: JointAction
    semi: tuple = None    # ((i, j, l, v), ...) with i < j, one entry per co-member pair
    bandit: tuple = None  # per-agent totals


@dataclass
class Dataset:
    meta: dict = field(default_factory=dict)
    records: list = field(default_factory=list)

    @property
    def feedback(self) -> str:
        return self.meta.get("feedback")

    def __len__(self) -> int:
        return len(self.records)

    def __eq__(self, other):
        return isinstance(other, Dataset) and self.meta == other.meta and self.records == other.records


def game_fingerprint(game: GameSpec) -> dict:
    src = game.meta.get("source")
    if src is not None:
        return dict(src)
    return {
        "kind": "custom",
        "n": game.n,
        "k": game.k,
        "action_sets": [[sorted(l + 1 for l in a) for a in per] for per in game.action_sets],
    }


def game_from_fingerprint(fp: dict) -> GameSpec:
    """Rebuild a game from a dataset's recorded fingerprint; refuses
    fingerprints of hand-built games whose mean law was never recorded."""
    from .generators import make_game

    kind = fp.get("kind")
    if kind == "builtin":
        from .builtins import builtin_game

        return builtin_game(fp["name"])
    if kind == "mean_table":
        return table_game(fp["n"], fp["k"], fp["action_sets"], fp["entries"])
    if kind == "custom" or kind is None:
        raise PocfError("fingerprint does not identify a reconstructible game")
    kwargs = {}
    if "action_sets" in fp:
        kwargs["action_sets"] = [
            [frozenset(l - 1 for l in a) for a in per] for per in fp["action_sets"]
        ]
    if "action_set_size" in fp:
        kwargs["action_set_size"] = fp["action_set_size"]
    return make_game(kind, fp["n"], fp["k"], seed=fp.get("seed", 0), **kwargs)


def _record_from_table(game, a, table, feedback) -> Record:
    if feedback == "semi":
        entries = []
        for l in range(game.k):
            members = sorted(i for i in range(game.n) if l in a[i])
            for i, j in itertools.combinations(members, 2):
                entries.append((i, j, l, float(table[l, i, j])))
        return Record(action=a, semi=tuple(entries))
    totals = realized_utilities(game, a, table)
    return Record(action=a, bandit=tuple(float(v) for v in totals))


def sample_dataset(game: GameSpec, policy: ExplorationPolicy, M: int, feedback: str,
                   rng) -> Dataset:
    """Draw M i.i.d. records: a joint action from the policy, then one
    utility-table sample at that action.

    Each record owns a child random stream derived from (seed, record index),
    so records could be generated in any order or in parallel without
    changing the result.
    """
    if feedback not in FEEDBACK_KINDS:
        raise PocfError(f"feedback must be one of {FEEDBACK_KINDS}, got {feedback!r}")
    if M < 0:
        raise PocfError(f"M must be >= 0, got {M}")
    policy.validate(game)
    seed = rng if isinstance(rng, (int, np.integer)) else None
    if isinstance(rng, np.random.SeedSequence):
        ss = rng
    elif seed is not None:
        ss = np.random.SeedSequence(seed)
    elif isinstance(rng, np.random.Generator):
        ss = rng.bit_generator.seed_seq.spawn(1)[0]
    else:
        raise PocfError("rng must be an int seed, SeedSequence, or Generator")
    meta = {
        "n": game.n,
        "k": game.k,
        "feedback": feedback,
        "M": int(M),
        "game": game_fingerprint(game),
        "policy": policy.descriptor(),
        "seed": int(seed) if seed is not None else None,
    }
    records = []
    for child in ss.spawn(M):
        r = np.random.default_rng(child)
        a = policy.sample(game, r)
        table = sample_utilities(game, a, r)
        records.append(_record_from_table(game, a, table, feedback))
    return Dataset(meta=meta, records=records)


# --- JSONL serialization ---------------------------------------------------


def _action_to_json(a) -> list:
    return [sorted(l + 1 for l in ai) for ai in a]


def _action_from_json(raw) -> JointAction:
    return tuple(frozenset(l - 1 for l in ai) for ai in raw)


def write_dataset(ds: Dataset, path) -> None:
    path = Path(path)
    with path.open("w") as fh:
        fh.write(json.dumps({"meta": ds.meta}) + "\n")
        for rec in ds.records:
            row = {"a": _action_to_json(rec.action)}
            if rec.semi is not None:
                row["fb"] = {"semi": [[i + 1, j + 1, l + 1, v] for i, j, l, v in rec.semi]}
            else:
                row["fb"] = {"bandit": list(rec.bandit)}
            fh.write(json.dumps(row) + "\n")


def read_dataset(path) -> Dataset:
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise DatasetFormatError(1, "empty file, expected a meta line")
    try:
        head = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(1, f"bad JSON: {exc}") from None
    if not isinstance(head, dict) or "meta" not in head:
        raise DatasetFormatError(1, "first line must be a meta object")
    meta = head["meta"]
    records = []
    for no, line in enumerate(lines[1:], start=2):
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetFormatError(no, f"bad JSON: {exc}") from None
        try:
            action = _action_from_json(row["a"])
            fb = row["fb"]
            if "semi" in fb:
                semi = tuple((i - 1, j - 1, l - 1, float(v)) for i, j, l, v in fb["semi"])
                records.append(Record(action=action, semi=semi))
            elif "bandit" in fb:
                records.append(Record(action=action, bandit=tuple(float(v) for v in fb["bandit"])))
            else:
                raise KeyError("fb")
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetFormatError(no, f"malformed record: {exc!r}") from None
    return Dataset(meta=meta, records=records)


# --- game files ------------------------------------------------------------


def save_game(game: GameSpec, path) -> None:
    src = game.meta.get("source")
    if src is None:
        raise PocfError("only generator-backed or mean-table games can be saved")
    if src.get("kind") == "builtin":
        Path(path).write_text(json.dumps({"builtin": src["name"]}, indent=2) + "\n")
        return
    doc = {
        "n": game.n,
        "k": game.k,
        "action_sets": [[sorted(l + 1 for l in a) for a in per] for per in game.action_sets],
    }
    if src.get("kind") == "mean_table":
        doc["mean_table"] = src["entries"]
    else:
        params = {key: src[key] for key in ("action_set_size",) if key in src}
        doc["generator"] = {"kind": src["kind"], "params": params, "seed": src.get("seed", 0)}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def table_game(n: int, k: int, action_sets, entries) -> GameSpec:
    """Deterministic game from explicit mean entries.

    ``action_sets`` and each entry ``[i, j, l, size, value]`` use one-based
    indices, matching the on-disk format. ``size`` may be null, meaning any
    size. Unlisted pairs default to 0. Entries apply symmetrically to
    (i, j) and (j, i).
    """
    table = {}
    for i, j, l, size, value in entries:
        if i == j:
            raise PocfError("mean entries must have i != j")
        key = (min(i, j) - 1, max(i, j) - 1, l - 1, None if size is None else int(size))
        table[key] = float(value)

    def mean_law(i, j, l, s, _t=table):
        lo, hi = (i, j) if i < j else (j, i)
        if (lo, hi, l, s) in _t:
            return _t[(lo, hi, l, s)]
        return _t.get((lo, hi, l, None), 0.0)

    acts = tuple(tuple(as_action(l - 1 for l in a) for a in per) for per in action_sets)
    source = {
        "kind": "mean_table",
        "n": n,
        "k": k,
        "action_sets": [[sorted(l + 1 for l in a) for a in per] for per in acts],
        "entries": [list(e) for e in entries],
    }
    return GameSpec(n=n, k=k, action_sets=acts, mean_law=mean_law,
                    meta={"source": source})


def load_game(path) -> GameSpec:
    from .generators import make_game

    doc = json.loads(Path(path).read_text())
    if "builtin" in doc:
        from .builtins import builtin_game

        return builtin_game(doc["builtin"])
    for key in ("n", "k", "action_sets"):
        if key not in doc:
            raise PocfError(f"game file missing {key!r}")
    if "generator" in doc:
        gen = doc["generator"]
        acts = [[frozenset(l - 1 for l in a) for a in per] for per in doc["action_sets"]]
        return make_game(
            gen["kind"], doc["n"], doc["k"],
            seed=gen.get("seed", 0),
            action_sets=None if gen["kind"] == "mixed_effects" else acts,
            **{key: val for key, val in gen.get("params", {}).items()},
        )
    if "mean_table" in doc:
        return table_game(doc["n"], doc["k"], doc["action_sets"], doc["mean_table"])
    raise PocfError("game file needs either a generator or a mean_table")
