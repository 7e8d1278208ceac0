"""Core model: overlapping coalition formation games.

A game has n agents and k candidate coalitions. Each agent picks a nonempty
subset of the coalition labels from her own action set; agents choosing a
common label become co-members of that coalition, and coalitions may overlap.
An agent's utility is the sum, over her chosen coalitions, of pairwise mutual
utilities with every co-member. Mutual utilities are symmetric, zero on the
diagonal, bounded in [-1, 1], and may depend on the realized coalition size.

All indices are zero-based internally; serialization converts to one-based.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import EnumerationBudgetError, InvalidActionError, PocfError

Action = frozenset
JointAction = tuple
MeanLaw = Callable[[int, int, int, int], float]

#: Exact enumeration is allowed while the joint-action space has at most
#: this many elements; larger instances must use Monte Carlo estimates.
ENUMERATION_BUDGET = 100_000

#: Strict-improvement threshold for stability checks, so floating-point ties
#: are never read as profitable deviations.
STABILITY_TOL = 1e-9


def as_action(labels) -> Action:
    return labels if isinstance(labels, frozenset) else frozenset(labels)


def as_joint_action(actions) -> JointAction:
    return tuple(as_action(a) for a in actions)


@dataclass(frozen=True)
class NoiseLaw:
    """Sampling distribution of mutual utilities around their means.

    kind:
      - "deterministic": samples equal the mean exactly.
      - "pair_iid": each co-member pair draws independently through
        ``draw_pairs(rng, coalition, size, i_idx, j_idx) -> values``.
      - "shared_shift": one Gaussian shock per coalition per table, added to
        ``shift_base(coalition, size)`` and clamped to [-1, 1]; every pair in
        the coalition shares the shock.
    """

    kind: str = "deterministic"
    draw_pairs: Callable[..., np.ndarray] | None = None
    shift_base: Callable[[int, int], float] | None = None
    shift_scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("deterministic", "pair_iid", "shared_shift"):
            raise PocfError(f"unknown noise kind {self.kind!r}")
        if self.kind == "pair_iid" and self.draw_pairs is None:
            raise PocfError("pair_iid noise requires draw_pairs")
        if self.kind == "shared_shift" and self.shift_base is None:
            raise PocfError("shared_shift noise requires shift_base")


DETERMINISTIC = NoiseLaw()


@dataclass(frozen=True)
class GameSpec:
    """An overlapping coalition formation game.

    Parameters
    ----------
    n, k
        Agent count and candidate-coalition count, both >= 1.
    action_sets
        Per-agent ordered tuple of distinct actions; each action is a
        nonempty frozenset of coalition labels in ``range(k)``. The order
        records insertion order and is meaningful (policies may refer to
        "the second action").
    mean_law
        ``(i, j, coalition, size) -> mean`` of the sampling distribution of
        the mutual utility of agents i and j as co-members of the coalition
        at the given realized size. Must be symmetric in (i, j), zero for
        i == j, and bounded in [-1, 1].
    noise
        How samples are drawn around the mean; defaults to deterministic.
    meta
        Free-form descriptors (generator source, display name).
    """

    n: int
    k: int
    action_sets: tuple
    mean_law: MeanLaw = field(repr=False, default=lambda i, j, l, s: 0.0)
    noise: NoiseLaw = field(repr=False, default=DETERMINISTIC)
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise PocfError(f"need n >= 1 and k >= 1, got n={self.n} k={self.k}")
        sets = tuple(tuple(as_action(a) for a in acts) for acts in self.action_sets)
        object.__setattr__(self, "action_sets", sets)
        if len(sets) != self.n:
            raise PocfError(f"need {self.n} action sets, got {len(sets)}")
        for i, acts in enumerate(sets):
            if not acts:
                raise InvalidActionError(i, "empty action set")
            if len(set(acts)) != len(acts):
                raise InvalidActionError(i, "duplicate actions in action set")
            for a in acts:
                if not a:
                    raise InvalidActionError(i, "empty action (no coalition chosen)")
                if not a <= frozenset(range(self.k)):
                    raise InvalidActionError(
                        i, f"action {sorted(x + 1 for x in a)} uses labels outside 1..{self.k}"
                    )

    @cached_property
    def _action_index(self) -> tuple:
        return tuple({a: t for t, a in enumerate(acts)} for acts in self.action_sets)

    def action_position(self, i: int, action: Action) -> int:
        try:
            return self._action_index[i][as_action(action)]
        except KeyError:
            raise InvalidActionError(
                i, f"action {sorted(x + 1 for x in as_action(action))} not in action set"
            ) from None

    @cached_property
    def space_size(self) -> int:
        out = 1
        for acts in self.action_sets:
            out *= len(acts)
        return out

    @cached_property
    def space(self) -> "ActionSpace":
        return ActionSpace(self)

    def mean_cube(self, max_size: int | None = None) -> np.ndarray:
        """Dense lookup ``cube[l, i, j, s]`` of mean_law over all sizes."""
        top = self.n if max_size is None else max_size
        cube = np.zeros((self.k, self.n, self.n, top + 1))
        for l in range(self.k):
            for i in range(self.n):
                for j in range(self.n):
                    if i != j:
                        for s in range(2, top + 1):
                            cube[l, i, j, s] = self.mean_law(i, j, l, s)
        return cube


def validate_joint_action(game: GameSpec, a) -> JointAction:
    a = as_joint_action(a)
    if len(a) != game.n:
        raise InvalidActionError(
            min(len(a), game.n) - 1, f"joint action has {len(a)} entries, game has {game.n} agents"
        )
    for i, ai in enumerate(a):
        game.action_position(i, ai)
    return a


class Partition(NamedTuple):
    """Coalition member sets induced by a joint action."""

    members: tuple
    sizes: tuple

    @property
    def nonempty_count(self) -> int:
        return sum(1 for m in self.members if m)


def induce_partition(game: GameSpec, a) -> Partition:
    """Member set of every candidate coalition under the joint action.

    Coalition l collects exactly the agents whose chosen action contains l;
    coalitions may overlap and may be empty.
    """
    a = validate_joint_action(game, a)
    members = tuple(
        frozenset(i for i in range(game.n) if l in a[i]) for l in range(game.k)
    )
    return Partition(members, tuple(len(m) for m in members))


def mean_utility(game: GameSpec, a, i: int) -> float:
    """Expected utility of agent i under the joint action.

    The sum over the agent's chosen coalitions of the mean mutual utilities
    with every co-member, at the realized coalition sizes.
    """
    return float(mean_utilities(game, a)[i])


def mean_utilities(game: GameSpec, a) -> np.ndarray:
    a = validate_joint_action(game, a)
    part = induce_partition(game, a)
    out = np.zeros(game.n)
    for l, mem in enumerate(part.members):
        s = part.sizes[l]
        if s < 2:
            continue
        mem = sorted(mem)
        for i in mem:
            out[i] += sum(game.mean_law(i, j, l, s) for j in mem if j != i)
    return out


def potential(game: GameSpec, a) -> float:
    """Half the sum of all agents' mean utilities at the joint action."""
    return 0.5 * float(mean_utilities(game, a).sum())


def sample_utilities(game: GameSpec, a, rng) -> np.ndarray:
    """One draw of the full pairwise-utility table at the joint action.

    Returns a ``(k, n, n)`` array, symmetric in the agent axes with a zero
    diagonal; entries are zero unless both agents are co-members of the
    coalition. A fixed seed reproduces the table exactly.
    """
    a = validate_joint_action(game, a)
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    part = induce_partition(game, a)
    table = np.zeros((game.k, game.n, game.n))
    noise = game.noise
    if noise.kind == "shared_shift":
        # one shock per coalition, drawn unconditionally to keep the stream
        # layout independent of the action
        shocks = rng.normal(0.0, noise.shift_scale, size=game.k)
    for l, mem in enumerate(part.members):
        s = part.sizes[l]
        if s < 2:
            continue
        mem = sorted(mem)
        ii, jj = zip(*itertools.combinations(mem, 2))
        ii = np.asarray(ii)
        jj = np.asarray(jj)
        if noise.kind == "deterministic":
            vals = np.array([game.mean_law(i, j, l, s) for i, j in zip(ii, jj)])
        elif noise.kind == "pair_iid":
            vals = np.asarray(noise.draw_pairs(rng, l, s, ii, jj), dtype=float)
        else:
            base = noise.shift_base(l, s)
            vals = np.clip(np.full(len(ii), base + shocks[l]), -1.0, 1.0)
        table[l, ii, jj] = vals
        table[l, jj, ii] = vals
    return table


def realized_utilities(game: GameSpec, a, table: np.ndarray) -> np.ndarray:
    """Per-agent totals implied by a sampled pairwise-utility table."""
    a = validate_joint_action(game, a)
    out = np.zeros(game.n)
    for i, ai in enumerate(a):
        for l in ai:
            out[i] += table[l, i, :].sum()
    return out


@dataclass(frozen=True)
class MixedProfile:
    """Product distribution: one probability vector per agent.

    ``probs[i]`` is indexed by the position of each action in agent i's
    ordered action set. Vectors must be nonnegative and sum to one within
    1e-9.
    """

    probs: tuple

    def __post_init__(self):
        vecs = []
        for i, p in enumerate(self.probs):
            p = np.asarray(p, dtype=float)
            if p.ndim != 1 or (p < 0).any():
                raise PocfError(f"agent {i + 1}: probabilities must be a nonnegative vector")
            if abs(p.sum() - 1.0) > 1e-9:
                raise PocfError(f"agent {i + 1}: probabilities sum to {p.sum()!r}, not 1")
            p = p.copy()
            p.flags.writeable = False
            vecs.append(p)
        object.__setattr__(self, "probs", tuple(vecs))

    @staticmethod
    def uniform(game: GameSpec) -> "MixedProfile":
        return MixedProfile(tuple(np.full(len(acts), 1.0 / len(acts)) for acts in game.action_sets))

    @staticmethod
    def point_mass(game: GameSpec, a) -> "MixedProfile":
        a = validate_joint_action(game, a)
        vecs = []
        for i, ai in enumerate(a):
            v = np.zeros(len(game.action_sets[i]))
            v[game.action_position(i, ai)] = 1.0
            vecs.append(v)
        return MixedProfile(tuple(vecs))

    def with_agent(self, i: int, vec: np.ndarray) -> "MixedProfile":
        vecs = list(self.probs)
        vecs[i] = np.asarray(vec, dtype=float)
        return MixedProfile(tuple(vecs))

    def support(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.probs[i] > 0.0)

    def support_size(self) -> int:
        out = 1
        for i in range(len(self.probs)):
            out *= len(self.support(i))
        return out

    def sample(self, game: GameSpec, rng: np.random.Generator) -> JointAction:
        return tuple(
            game.action_sets[i][rng.choice(len(p), p=p)] for i, p in enumerate(self.probs)
        )

    def prob(self, game: GameSpec, a) -> float:
        a = validate_joint_action(game, a)
        out = 1.0
        for i, ai in enumerate(a):
            out *= self.probs[i][game.action_position(i, ai)]
        return out


class ActionSpace:
    """Dense enumeration of a game's joint-action space.

    Joint actions are numbered in mixed radix: agent 0 is the most
    significant digit, and within each agent the digit is the position of
    the action in her ordered action set. Provides vectorized membership,
    size, and mean-utility tables used by the brute-force oracles and the
    solver's exact mode.
    """

    def __init__(self, game: GameSpec, budget: int = ENUMERATION_BUDGET):
        if game.space_size > budget:
            raise EnumerationBudgetError(game.space_size, budget)
        self.game = game
        self.counts = tuple(len(acts) for acts in game.action_sets)
        self.size = game.space_size
        strides = []
        acc = 1
        for c in reversed(self.counts):
            strides.append(acc)
            acc *= c
        self.strides = tuple(reversed(strides))

    def index_of(self, a) -> int:
        a = validate_joint_action(self.game, a)
        return sum(
            self.game.action_position(i, ai) * self.strides[i] for i, ai in enumerate(a)
        )

    def action_at(self, s: int) -> JointAction:
        return tuple(
            self.game.action_sets[i][(s // self.strides[i]) % self.counts[i]]
            for i in range(self.game.n)
        )

    def __iter__(self) -> Iterator[JointAction]:
        return (self.action_at(s) for s in range(self.size))

    @cached_property
    def digits(self) -> np.ndarray:
        """Per-agent action positions for every index; shape (size, n)."""
        s = np.arange(self.size)
        return np.stack(
            [(s // self.strides[i]) % self.counts[i] for i in range(self.game.n)], axis=1
        )

    def deviation_index(self, s, i: int, alt_pos: int):
        """Index of the joint action with agent i's digit replaced."""
        cur = (s // self.strides[i]) % self.counts[i]
        return s + (alt_pos - cur) * self.strides[i]

    @cached_property
    def membership(self) -> np.ndarray:
        """Boolean array ``[l, s, i]``: does agent i's action contain l."""
        g = self.game
        contains = np.zeros((g.n, max(self.counts), g.k), dtype=bool)
        for i, acts in enumerate(g.action_sets):
            for t, a in enumerate(acts):
                for l in a:
                    contains[i, t, l] = True
        mem = np.zeros((g.k, self.size, g.n), dtype=bool)
        for l in range(g.k):
            for i in range(g.n):
                mem[l, :, i] = contains[i, self.digits[:, i], l]
        return mem

    @cached_property
    def sizes(self) -> np.ndarray:
        """Coalition sizes ``[s, l]`` for every joint action."""
        return self.membership.sum(axis=2).T.astype(np.int64)

    @cached_property
    def mean_table(self) -> np.ndarray:
        """Mean utilities ``[s, i]`` of every agent at every joint action."""
        g = self.game
        cube = g.mean_cube()
        out = np.zeros((self.size, g.n))
        for l in range(g.k):
            mem = self.membership[l].astype(float)
            vals = cube[l][:, :, self.sizes[:, l]]  # (n, n, size)
            out += mem * np.einsum("sj,ijs->si", mem, vals)
        return out

    def pair_table(self, per_pair: np.ndarray) -> np.ndarray:
        """Contract a size-independent ``[l, i, j]`` pair table to ``[s, i]``.

        Sums, for each joint action and agent, the pair values over the
        agent's coalitions and their co-members. Used for estimator means
        and bonuses.
        """
        out = np.zeros((self.size, self.game.n))
        for l in range(self.game.k):
            mem = self.membership[l].astype(float)
            out += mem * (mem @ per_pair[l].T)
        return out


def _expect_vector(table_col: np.ndarray, space: ActionSpace, phi: MixedProfile, i: int) -> np.ndarray:
    """Expectation over everyone but agent i; returns a vector over A_i."""
    T = table_col.reshape(space.counts)
    for j in reversed(range(len(space.counts))):
        if j == i:
            continue
        T = np.tensordot(T, phi.probs[j], axes=(j, 0))
    return T


class ExactGapReport(NamedTuple):
    """Duality gap of a mixed profile, with the worst agent's deviation."""

    gap: float
    agent: int
    deviation: Action
    per_agent: tuple
    stderr: float | None = None


def expected_utility(
    game: GameSpec,
    phi: MixedProfile,
    i: int,
    *,
    mode: str = "exact",
    mc_samples: int = 100,
    rng=None,
    return_stderr: bool = False,
):
    """Expected mean utility of agent i under a product profile.

    Exact mode enumerates the support product (refusing beyond the
    enumeration budget); Monte Carlo mode averages over i.i.d. draws and can
    report the standard error of the estimate.
    """
    if mode == "exact":
        if game.space_size <= ENUMERATION_BUDGET:
            space = game.space
            vec = _expect_vector(space.mean_table[:, i], space, phi, i)
            val = float(vec @ phi.probs[i])
        else:
            supp = [phi.support(j) for j in range(game.n)]
            total = math.prod(len(s) for s in supp)
            if total > ENUMERATION_BUDGET:
                raise EnumerationBudgetError(total, ENUMERATION_BUDGET)
            val = 0.0
            for combo in itertools.product(*supp):
                w = math.prod(phi.probs[j][t] for j, t in enumerate(combo))
                a = tuple(game.action_sets[j][t] for j, t in enumerate(combo))
                val += w * mean_utility(game, a, i)
        return (val, 0.0) if return_stderr else val
    if mode != "monte_carlo":
        raise PocfError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    draws = np.array(
        [mean_utility(game, phi.sample(game, rng), i) for _ in range(mc_samples)]
    )
    val = float(draws.mean())
    err = float(draws.std(ddof=1) / math.sqrt(mc_samples)) if mc_samples > 1 else float("inf")
    return (val, err) if return_stderr else val


def exact_duality_gap(
    game: GameSpec,
    phi: MixedProfile,
    *,
    mode: str = "exact",
    mc_samples: int = 100,
    rng=None,
) -> ExactGapReport:
    """Worst agent's best-response improvement over her current strategy.

    The inner maximization runs over pure deviations only; that is lossless
    because the objective is linear in the deviating agent's mixture, so the
    maximum over her simplex is attained at a vertex.
    """
    if mode == "exact":
        per_agent = []
        if game.space_size <= ENUMERATION_BUDGET:
            space = game.space
            for i in range(game.n):
                vec = _expect_vector(space.mean_table[:, i], space, phi, i)
                cur = float(vec @ phi.probs[i])
                best = int(np.argmax(vec))
                per_agent.append((i, game.action_sets[i][best], float(vec[best]), cur))
        else:
            for i in range(game.n):
                supp = [phi.support(j) for j in range(game.n) if j != i]
                total = len(game.action_sets[i]) * math.prod(len(s) for s in supp)
                if total > ENUMERATION_BUDGET:
                    raise EnumerationBudgetError(total, ENUMERATION_BUDGET)
                vec = np.zeros(len(game.action_sets[i]))
                others = [j for j in range(game.n) if j != i]
                for combo in itertools.product(*supp):
                    w = math.prod(phi.probs[j][t] for j, t in zip(others, combo))
                    a = list(range(game.n))
                    for j, t in zip(others, combo):
                        a[j] = game.action_sets[j][t]
                    for t_i, ai in enumerate(game.action_sets[i]):
                        a[i] = ai
                        vec[t_i] += w * mean_utility(game, tuple(a), i)
                cur = float(vec @ phi.probs[i])
                best = int(np.argmax(vec))
                per_agent.append((i, game.action_sets[i][best], float(vec[best]), cur))
        gaps = [hi - cur for (_, _, hi, cur) in per_agent]
        worst = int(np.argmax(gaps))
        return ExactGapReport(
            gap=max(0.0, float(gaps[worst])),
            agent=worst,
            deviation=per_agent[worst][1],
            per_agent=tuple(per_agent),
        )
    if mode != "monte_carlo":
        raise PocfError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    per_agent = []
    errs = []
    for i in range(game.n):
        cur_draws = np.zeros(mc_samples)
        dev_draws = np.zeros((mc_samples, len(game.action_sets[i])))
        for m in range(mc_samples):
            a = list(phi.sample(game, rng))
            cur_draws[m] = mean_utility(game, tuple(a), i)
            for t, ai in enumerate(game.action_sets[i]):
                a[i] = ai
                dev_draws[m, t] = mean_utility(game, tuple(a), i)
        vec = dev_draws.mean(axis=0)
        best = int(np.argmax(vec))
        per_agent.append((i, game.action_sets[i][best], float(vec[best]), float(cur_draws.mean())))
        spread = (dev_draws[:, best] - cur_draws).std(ddof=1) if mc_samples > 1 else float("inf")
        errs.append(spread / math.sqrt(mc_samples))
    gaps = [hi - cur for (_, _, hi, cur) in per_agent]
    worst = int(np.argmax(gaps))
    return ExactGapReport(
        gap=max(0.0, float(gaps[worst])),
        agent=worst,
        deviation=per_agent[worst][1],
        per_agent=tuple(per_agent),
        stderr=float(errs[worst]),
    )
