"""Per-pair count/mean estimator for pairwise feedback, its Hoeffding
bonus, and the size-coverage condition that controls its sample
complexity."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset, coalition_size_densities
from .errors import FeedbackKindError, PocfError
from .games import GameSpec, MixedProfile, validate_joint_action


@dataclass(frozen=True)
class SemiBanditEstimator:
    """Empirical pair means with co-membership counts.

    ``counts[l, i, j]`` is how many records put i and j together in
    coalition l; ``means`` is the running average of the observed values
    there, zero where nothing was seen. Both arrays stay symmetric with a
    zero diagonal.
    """

    game: GameSpec
    delta: float
    counts: np.ndarray  # (k, n, n) int
    sums: np.ndarray    # (k, n, n) float

    @property
    def n(self) -> int:
        return self.game.n

    @property
    def k(self) -> int:
        return self.game.k

    @property
    def means(self) -> np.ndarray:
        return self.sums / np.maximum(self.counts, 1)

    @property
    def log_term(self) -> float:
        return math.log(4 * (self.n + 1) * self.k / self.delta)

    @property
    def bonus_terms(self) -> np.ndarray:
        """Per-pair bonus contribution sqrt(2 log(4(n+1)k/delta) / (N v 1)).

        Unobserved pairs contribute at full width rather than being
        skipped; that is the more conservative of the two published forms.
        The diagonal is zeroed: an agent is not her own co-member.
        """
        t = np.sqrt(2.0 * self.log_term / np.maximum(self.counts, 1))
        for l in range(self.k):
            np.fill_diagonal(t[l], 0.0)
        return t

    def estimate(self, a) -> np.ndarray:
        a = validate_joint_action(self.game, a)
        return _pair_sum(self.game, a, self.means)

    def bonus(self, a) -> np.ndarray:
        a = validate_joint_action(self.game, a)
        return _pair_sum(self.game, a, self.bonus_terms)

    def ucb_lcb(self, a):
        est, b = self.estimate(a), self.bonus(a)
        return est + b, est - b

    def mean_tables(self, space) -> np.ndarray:
        return space.pair_table(self.means)

    def bonus_tables(self, space) -> np.ndarray:
        return space.pair_table(self.bonus_terms)

    def to_dict(self) -> dict:
        return {
            "kind": "semi",
            "n": self.n,
            "k": self.k,
            "delta": self.delta,
            "counts": self.counts.tolist(),
            "means": self.means.tolist(),
        }

    @staticmethod
    def from_dict(game: GameSpec, doc: dict) -> "SemiBanditEstimator":
        if doc.get("kind") != "semi" or doc["n"] != game.n or doc["k"] != game.k:
            raise PocfError("estimator document does not match the game shape")
        counts = np.asarray(doc["counts"], dtype=np.int64)
        means = np.asarray(doc["means"], dtype=float)
        return SemiBanditEstimator(game=game, delta=doc["delta"], counts=counts,
                                   sums=means * np.maximum(counts, 1))


def _pair_sum(game: GameSpec, a, table: np.ndarray) -> np.ndarray:
    out = np.zeros(game.n)
    for l in range(game.k):
        members = [i for i in range(game.n) if l in a[i]]
        for i in members:
            for j in members:
                if j != i:
                    out[i] += table[l, i, j]
    return out


def fit_semibandit(game: GameSpec, ds: Dataset, delta: float) -> SemiBanditEstimator:
    if not 0 < delta <= 1:
        raise PocfError(f"delta must be in (0, 1], got {delta}")
    if ds.feedback != "semi":
        raise FeedbackKindError(
            f"semibandit fit needs pairwise feedback, dataset has {ds.feedback!r} "
            "(per-agent totals cannot be split into pairs)"
        )
    counts = np.zeros((game.k, game.n, game.n), dtype=np.int64)
    sums = np.zeros((game.k, game.n, game.n))
    for rec in ds.records:
        for i, j, l, v in rec.semi:
            counts[l, i, j] += 1
            counts[l, j, i] += 1
            sums[l, i, j] += v
            sums[l, j, i] += v
    return SemiBanditEstimator(game=game, delta=delta, counts=counts, sums=sums)


# --- size coverage ---------------------------------------------------------


@dataclass(frozen=True)
class CoverageWitness:
    agent: int
    coalition: int
    deviation: frozenset
    size: int

    def __str__(self):
        dev = sorted(l + 1 for l in self.deviation)
        return (f"agent {self.agent + 1} deviating to {dev} reaches |C_{self.coalition + 1}|"
                f" = {self.size}, a size the policy never produces")


def _coverage_scan(game: GameSpec, policy, ns_profile: MixedProfile):
    """Max density ratio between one-agent deviations from the stable
    profile and the exploration policy, or the first uncovered witness.

    Deviations range over each agent's full action set, the current action
    included. Pure deviations suffice: the deviation density is linear in
    the deviating agent's mixture.
    """
    base = [coalition_size_densities(game, policy, l) for l in range(game.k)]
    worst = 0.0
    for i in range(game.n):
        for alt in game.action_sets[i]:
            prof = ns_profile.with_agent(
                i, _onehot(len(game.action_sets[i]), game.action_position(i, alt))
            )
            for l in range(game.k):
                dev = coalition_size_densities(game, prof, l)
                for alpha in range(game.n + 1):
                    if dev[alpha] <= 1e-12:
                        continue
                    if base[l][alpha] <= 0.0:
                        return math.inf, CoverageWitness(i, l, alt, alpha)
                    worst = max(worst, dev[alpha] / base[l][alpha])
    return worst, None


def _onehot(length: int, pos: int) -> np.ndarray:
    v = np.zeros(length)
    v[pos] = 1.0
    return v


def coalition_size_coefficient(game: GameSpec, policy, ns_profile: MixedProfile) -> float:
    """Worst-case deviation/policy size-density ratio; inf if uncovered."""
    value, _ = _coverage_scan(game, policy, ns_profile)
    return value


def check_assumption1(game: GameSpec, policy, ns_profile: MixedProfile):
    """(ok, witness): every size reachable by a one-agent deviation has
    positive density under the policy."""
    value, witness = _coverage_scan(game, policy, ns_profile)
    return math.isfinite(value), witness


def theoretical_bound_semibandit(n: int, k: int, c_size: float, delta: float, M: int,
                                 eps_opt: float = 0.0, variant: str = "mixed") -> float:
    """High-probability gap bound for the pairwise-feedback pipeline."""
    if variant not in ("mixed", "pure"):
        raise PocfError(f"variant must be mixed or pure, got {variant!r}")
    if not 0 < delta <= 1:
        raise PocfError(f"delta must be in (0, 1], got {delta}")
    if n < 1 or k < 1 or M < 1 or c_size < 0:
        raise PocfError("n, k, M must be >= 1 and c_size >= 0")
    lead = 24.0 * k * n if variant == "pure" else 8.0 * k * n * (n + 1)
    f = (lead * c_size * math.log(4 * (n + 1) * k / delta)
         * math.sqrt(2.0 * (n - 1)) * ((n - 1) / 2.0 + math.sqrt(n / 2.0)))
    return f / math.sqrt(M) + eps_opt
