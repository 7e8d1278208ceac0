"""Named reference games and their paired exploration policies.

Two six-agent families (D-G1, D-G2) share an action set where every agent
joins exactly one of two coalitions; they differ only in the first
coalition's per-size mean and are built so that some coalition sizes never
appear under the paired policy. Two three-agent families (F-G1, F-G2) give
each agent four actions including one overlapping pair. H-mixed(n) is the
five-coalition shared-shock game from the generator module.
"""

from __future__ import annotations

import itertools
import re

from .data import ExplorationPolicy
from .errors import UnknownBuiltinError
from .games import DETERMINISTIC, GameSpec
from .generators import make_game

_D_C1 = {
    "D-G1": {2: 1.0, 3: -1.0, 4: 1.0, 5: 1.0, 6: 1.0},
    "D-G2": {2: 1.0, 3: 1.0, 4: 1.0, 5: 1.0, 6: -1.0},
}

_F_TABLES = {
    "F-G1": ({2: 1.0, 3: 0.5}, {2: 1.0, 3: -1.0}, {2: -0.5, 3: -0.25}),
    "F-G2": ({2: 1.0, 3: -0.25}, {2: 1.0, 3: -0.25}, {2: -0.5, 3: -0.25}),
}

_H_NAME = re.compile(r"^H-mixed\((\d+)\)$")


def _d_game(name: str) -> GameSpec:
    c1 = _D_C1[name]

    def mean_law(i, j, l, s, _c1=c1):
        if l == 0:
            return _c1.get(s, 0.0)
        return -1.0 / (2.0 * (s - 1))

    acts = ((frozenset([0]), frozenset([1])),) * 6
    return GameSpec(n=6, k=2, action_sets=acts, mean_law=mean_law,
                    noise=DETERMINISTIC, meta={"source": {"kind": "builtin", "name": name}})


def _f_game(name: str) -> GameSpec:
    tables = _F_TABLES[name]

    def mean_law(i, j, l, s, _t=tables):
        return _t[l].get(s, 0.0)

    acts = ((frozenset([0]), frozenset([1]), frozenset([2]), frozenset([0, 1])),) * 3
    return GameSpec(n=3, k=3, action_sets=acts, mean_law=mean_law,
                    noise=DETERMINISTIC, meta={"source": {"kind": "builtin", "name": name}})


def builtin_names() -> list:
    return ["D-G1", "D-G2", "F-G1", "F-G2", "H-mixed(n)"]


def builtin_game(name: str) -> GameSpec:
    if name in _D_C1:
        return _d_game(name)
    if name in _F_TABLES:
        return _f_game(name)
    m = _H_NAME.match(name)
    if m:
        return make_game("mixed_effects", int(m.group(1)), 5, seed=0)
    raise UnknownBuiltinError(name, builtin_names())


def _d_policy() -> ExplorationPolicy:
    # Uniform over joint actions whose first coalition has size 2, 4, or 5.
    # Sizes 3 and 6 never occur, so per-size means there stay unobserved.
    one, two = frozenset([0]), frozenset([1])
    table = []
    for size in (2, 4, 5):
        for members in itertools.combinations(range(6), size):
            a = tuple(one if i in members else two for i in range(6))
            table.append((a, 1.0))
    weight = 1.0 / len(table)
    game = _d_game("D-G1")
    return ExplorationPolicy.explicit(game, [(a, weight) for a, _ in table], label="D")


def _f_policy() -> ExplorationPolicy:
    # Ten equally likely profiles chosen so the overlapping action is well
    # explored but the two single coalitions are never entered alone
    # together, keeping two mean entries jointly unidentifiable from
    # aggregate feedback.
    pair, three = frozenset([0, 1]), frozenset([2])
    singles = (frozenset([0]), frozenset([1]))
    profiles = [(pair, pair, pair)]
    for solo in range(3):
        profiles.append(tuple(three if i == solo else pair for i in range(3)))
    for odd in range(3):
        for single in singles:
            profiles.append(tuple(single if i == odd else three for i in range(3)))
    game = _f_game("F-G1")
    return ExplorationPolicy.explicit(game, [(a, 0.1) for a in profiles], label="F")


def builtin_policy(name: str) -> ExplorationPolicy:
    if name == "D" or name in _D_C1:
        return _d_policy()
    if name == "F" or name in _F_TABLES:
        return _f_policy()
    if name == "H" or _H_NAME.match(name):
        return ExplorationPolicy.one_rand()
    raise UnknownBuiltinError(name, ["D", "F", "H"] + builtin_names())
