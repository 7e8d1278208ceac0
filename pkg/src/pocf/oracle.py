"""Brute-force ground truth: stable-set enumeration, improving dynamics,
and certification of the builtin games against their closed-form stable
sets."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import PocfError
from .games import (
    ENUMERATION_BUDGET,
    STABILITY_TOL,
    GameSpec,
    JointAction,
    mean_utility,
    potential,
    validate_joint_action,
)


def enumerate_pure_ns(game: GameSpec, *, tol: float = STABILITY_TOL) -> list:
    """All joint actions where no agent can gain more than tol by a
    unilateral switch. Lexicographic order (agent 1 varies slowest)."""
    space = game.space
    d = space.mean_table
    s = np.arange(space.size)
    keep = np.ones(space.size, dtype=bool)
    for i in range(game.n):
        for p in range(space.counts[i]):
            keep &= d[space.deviation_index(s, i, p), i] <= d[:, i] + tol
    return [space.action_at(int(idx)) for idx in np.flatnonzero(keep)]


def _best_response(game: GameSpec, a, i: int, space=None):
    """(best value, best action) over agent i's pure switches, current
    action included. Ties keep the lowest action index."""
    if space is not None:
        s = space.index_of(a)
        vals = space.mean_table[space.deviation_index(s, i, np.arange(space.counts[i])), i]
        p = int(np.argmax(vals))
        return float(vals[p]), game.action_sets[i][p]
    best_v, best_a = None, None
    for alt in game.action_sets[i]:
        v = mean_utility(game, a[:i] + (alt,) + a[i + 1:], i)
        if best_v is None or v > best_v:
            best_v, best_a = v, alt
    return best_v, best_a


@dataclass(frozen=True)
class DynamicsResult:
    final: JointAction
    steps: int
    trace: tuple = None  # ((agent, gain, potential_delta), ...) when recorded


def better_response_dynamics(game: GameSpec, start, rng, *, tol: float = STABILITY_TOL,
                             max_steps: int = None, record_trace: bool = False) -> DynamicsResult:
    """From start, repeatedly let a uniformly random improving agent switch
    to her best pure response until nobody improves by more than tol.

    The step guard exists because termination is only guaranteed when the
    pairwise means do not depend on coalition size; exceeding it raises.
    """
    a = validate_joint_action(game, start)
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    space = game.space if game.space_size <= ENUMERATION_BUDGET else None
    if max_steps is None:
        max_steps = game.space_size * game.n * 1000
    trace = [] if record_trace else None
    for step in range(max_steps):
        if space is not None:
            row = space.mean_table[space.index_of(a)]
            current = [float(row[i]) for i in range(game.n)]
        else:
            current = [mean_utility(game, a, i) for i in range(game.n)]
        moves = []
        for i in range(game.n):
            v, alt = _best_response(game, a, i, space)
            if v > current[i] + tol:
                moves.append((i, v - current[i], alt))
        if not moves:
            return DynamicsResult(final=a, steps=step, trace=tuple(trace) if record_trace else None)
        i, gain, alt = moves[rng.integers(len(moves))]
        nxt = a[:i] + (alt,) + a[i + 1:]
        if record_trace:
            trace.append((i, gain, potential(game, nxt) - potential(game, a)))
        a = nxt
    raise PocfError(
        f"dynamics exceeded {max_steps} steps without stabilizing; "
        "either the means are size-dependent or the responder is buggy"
    )


# --- certification of builtin stable-set characterizations -----------------


@dataclass(frozen=True)
class ClauseResult:
    description: str
    claimed: int
    holds: bool
    counterexamples: tuple


@dataclass(frozen=True)
class CertificationReport:
    name: str
    ns_count: int
    clauses: tuple
    complete: bool
    unclaimed: tuple

    @property
    def passed(self) -> bool:
        return self.complete and all(c.holds for c in self.clauses)


def _coalition_sizes(a, k: int):
    return tuple(sum(1 for ai in a if l in ai) for l in range(k))


def _multiset(a):
    return frozenset(Counter(a).items())


def _claims(name: str, n: int):
    f0, f1, f2 = frozenset([0]), frozenset([1]), frozenset([2])
    f01 = frozenset([0, 1])
    if name == "D-G1":
        return [("first coalition has size 2 or 6",
                 lambda a: _coalition_sizes(a, 2)[0] in (2, 6))]
    if name == "D-G2":
        return [("first coalition has size exactly 5",
                 lambda a: _coalition_sizes(a, 2)[0] == 5)]
    if name == "F-G1":
        c1 = _multiset((f01, f01, f0))
        c2 = _multiset((f1, f1, f2))
        return [
            ("two agents join coalitions 1 and 2, the third joins only coalition 1",
             lambda a: _multiset(a) == c1),
            ("two agents join coalition 2, the third joins only coalition 3",
             lambda a: _multiset(a) == c2),
        ]
    if name == "F-G2":
        c2a = _multiset((f0, f0, f2))
        c2b = _multiset((f1, f1, f2))
        return [
            ("coalitions 1 and 2 both have size exactly 2",
             lambda a: _coalition_sizes(a, 3)[:2] == (2, 2)),
            ("two agents share coalition 1 or coalition 2, the third is alone in coalition 3",
             lambda a: _multiset(a) in (c2a, c2b)),
        ]
    if name.startswith("H-mixed"):
        target = (frozenset([0, 2, 4]),) * n
        return [("every agent plays the second action", lambda a: a == target)]
    raise PocfError(f"no stable-set characterization for {name!r}")


def verify_builtin(name: str, *, tol: float = STABILITY_TOL) -> CertificationReport:
    from .builtins import builtin_game

    game = builtin_game(name)
    ns = set(enumerate_pure_ns(game, tol=tol))
    clauses = []
    claimed_union = set()
    for desc, pred in _claims(name, game.n):
        matched = [a for a in game.space if pred(a)]
        claimed_union.update(matched)
        bad = tuple(a for a in matched if a not in ns)
        clauses.append(ClauseResult(description=desc, claimed=len(matched),
                                    holds=not bad, counterexamples=bad))
    unclaimed = tuple(sorted(
        (a for a in ns if a not in claimed_union),
        key=game.space.index_of,
    ))
    return CertificationReport(name=name, ns_count=len(ns), clauses=tuple(clauses),
                               complete=not unclaimed, unclaimed=unclaimed)
