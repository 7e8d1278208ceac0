"""Linear utility model for aggregate feedback: co-membership features,
ridge regression with an elliptical confidence bonus, and the covariance
coverage checker that controls its sample complexity."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .data import Dataset, ExplorationPolicy
from .errors import EnumerationBudgetError, FeedbackKindError, PocfError
from .games import ENUMERATION_BUDGET, GameSpec, MixedProfile, validate_joint_action


def _membership_bits(game: GameSpec, a) -> np.ndarray:
    """Bit matrix ``bits[j, l] = 1{l in a_j}``."""
    bits = np.zeros((game.n, game.k))
    for j, aj in enumerate(a):
        for l in aj:
            bits[j, l] = 1.0
    return bits


def co_membership_vector(game: GameSpec, a, i: int) -> np.ndarray:
    """Length nk block: entry j*k+l is 1 when l is in both a_i and a_j.

    The j = i bits are the indicator of a_i itself; they pair with the
    zero diagonal of the parameter vector, so keeping them is harmless and
    matches the literal feature definition.
    """
    bits = _membership_bits(game, a)
    return (bits * bits[i]).reshape(-1)


def feature_vector(game: GameSpec, a, i: int) -> np.ndarray:
    """The block-padded regression feature of dimension n^2 k."""
    a = validate_joint_action(game, a)
    z = np.zeros(game.n * game.n * game.k)
    nk = game.n * game.k
    z[i * nk:(i + 1) * nk] = co_membership_vector(game, a, i)
    return z


def stacked_true_parameter(game: GameSpec, size_for_pairs: int = None) -> np.ndarray:
    """Mean vector theta with layout [i][j][l]; exact for games whose
    means do not depend on coalition size (pass the size to read out)."""
    s = 2 if size_for_pairs is None else size_for_pairs
    theta = np.zeros(game.n * game.n * game.k)
    for i in range(game.n):
        for j in range(game.n):
            if i == j:
                continue
            for l in range(game.k):
                theta[(i * game.n + j) * game.k + l] = game.mean_law(i, j, l, s)
    return theta


@dataclass(frozen=True)
class RidgeEstimator:
    """Per-agent ridge regression over co-membership features.

    The features of different agents live in disjoint blocks, so the
    covariance matrix is block diagonal and everything is stored per
    agent: ``grams[i]`` is the (nk, nk) sum of feature outer products and
    ``theta[i]`` the fitted block.
    """

    game: GameSpec
    delta: float
    M: int
    grams: np.ndarray   # (n, nk, nk), without the identity regularizer
    rhs: np.ndarray     # (n, nk)
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.game.n

    @property
    def k(self) -> int:
        return self.game.k

    @cached_property
    def _factors(self):
        nk = self.n * self.k
        return [cho_factor(np.eye(nk) + self.grams[i]) for i in range(self.n)]

    @cached_property
    def theta(self) -> np.ndarray:
        return np.stack([cho_solve(self._factors[i], self.rhs[i]) for i in range(self.n)])

    @cached_property
    def _inverses(self) -> np.ndarray:
        nk = self.n * self.k
        return np.stack([cho_solve(self._factors[i], np.eye(nk)) for i in range(self.n)])

    @property
    def V(self) -> np.ndarray:
        """The full covariance matrix, assembled dense."""
        nk = self.n * self.k
        dim = self.n * nk
        out = np.eye(dim)
        for i in range(self.n):
            out[i * nk:(i + 1) * nk, i * nk:(i + 1) * nk] += self.grams[i]
        return out

    @property
    def theta_full(self) -> np.ndarray:
        return self.theta.reshape(-1)

    @property
    def iota(self) -> float:
        return 2.0 * math.log(4 * (self.n + 1) * self.k / self.delta)

    @property
    def sqrt_beta(self) -> float:
        d = self.n * self.n * self.k
        return 2.0 * math.sqrt(d) + math.sqrt(d * math.log(1.0 + self.M / self.n) + self.iota)

    @property
    def beta(self) -> float:
        return self.sqrt_beta ** 2

    def estimate(self, a) -> np.ndarray:
        a = validate_joint_action(self.game, a)
        return np.array([
            float(co_membership_vector(self.game, a, i) @ self.theta[i])
            for i in range(self.n)
        ])

    def bonus(self, a) -> np.ndarray:
        a = validate_joint_action(self.game, a)
        out = np.zeros(self.n)
        for i in range(self.n):
            y = co_membership_vector(self.game, a, i)
            out[i] = math.sqrt(max(float(y @ cho_solve(self._factors[i], y)), 0.0)) * self.sqrt_beta
        return out

    def ucb_lcb(self, a):
        est, b = self.estimate(a), self.bonus(a)
        return est + b, est - b

    def _co_membership_table(self, space, i: int) -> np.ndarray:
        """(space size, nk) matrix of agent i's feature blocks."""
        mem = space.membership  # (k, size, n)
        out = np.zeros((space.size, self.n * self.k))
        for l in range(self.k):
            out[:, l::self.k] = mem[l] * mem[l][:, [i]]
        return out

    def mean_tables(self, space) -> np.ndarray:
        return np.stack(
            [self._co_membership_table(space, i) @ self.theta[i] for i in range(self.n)],
            axis=1,
        )

    def bonus_tables(self, space) -> np.ndarray:
        out = np.zeros((space.size, self.n))
        for i in range(self.n):
            Y = self._co_membership_table(space, i)
            q = np.einsum("sp,pq,sq->s", Y, self._inverses[i], Y)
            out[:, i] = np.sqrt(np.maximum(q, 0.0)) * self.sqrt_beta
        return out

    def to_dict(self) -> dict:
        return {
            "kind": "bandit",
            "n": self.n,
            "k": self.k,
            "delta": self.delta,
            "M": self.M,
            "V": self.V.tolist(),
            "theta": self.theta_full.tolist(),
            "beta": self.beta,
            "meta": dict(self.meta),
        }

    @staticmethod
    def from_dict(game: GameSpec, doc: dict) -> "RidgeEstimator":
        if doc.get("kind") != "bandit" or doc["n"] != game.n or doc["k"] != game.k:
            raise PocfError("estimator document does not match the game shape")
        nk = game.n * game.k
        V = np.asarray(doc["V"], dtype=float)
        theta = np.asarray(doc["theta"], dtype=float).reshape(game.n, nk)
        grams = np.stack([
            V[i * nk:(i + 1) * nk, i * nk:(i + 1) * nk] - np.eye(nk)
            for i in range(game.n)
        ])
        rhs = np.stack([(np.eye(nk) + grams[i]) @ theta[i] for i in range(game.n)])
        return RidgeEstimator(game=game, delta=doc["delta"], M=doc["M"],
                              grams=grams, rhs=rhs, meta=doc.get("meta", {}))


def _record_totals(rec) -> np.ndarray:
    if rec.bandit is not None:
        return np.asarray(rec.bandit)
    n = len(rec.action)
    totals = np.zeros(n)
    for i, j, l, v in rec.semi:
        totals[i] += v
        totals[j] += v
    return totals


def fit_ridge(game: GameSpec, ds: Dataset, delta: float) -> RidgeEstimator:
    """Ridge fit of per-agent totals on co-membership features.

    Pairwise-feedback datasets are accepted by summing each record's pair
    values into totals first; the reduction is flagged on the estimator.
    """
    if not 0 < delta <= 1:
        raise PocfError(f"delta must be in (0, 1], got {delta}")
    if ds.feedback not in ("bandit", "semi"):
        raise FeedbackKindError(f"cannot fit ridge model on {ds.feedback!r} feedback")
    nk = game.n * game.k
    grams = np.zeros((game.n, nk, nk))
    rhs = np.zeros((game.n, nk))
    for rec in ds.records:
        bits = _membership_bits(game, rec.action)
        totals = _record_totals(rec)
        for i in range(game.n):
            y = (bits * bits[i]).reshape(-1)
            grams[i] += np.outer(y, y)
            rhs[i] += y * totals[i]
    meta = {"reduced_from": "semi"} if ds.feedback == "semi" else {}
    return RidgeEstimator(game=game, delta=delta, M=len(ds.records),
                          grams=grams, rhs=rhs, meta=meta)


# --- action coverage -------------------------------------------------------


@dataclass(frozen=True)
class CoverageEigenWitness:
    agent: int
    deviation: frozenset
    min_eigenvalue: float

    def __str__(self):
        dev = sorted(l + 1 for l in self.deviation)
        return (f"covariance deficit for agent {self.agent + 1} deviating to {dev}: "
                f"min eigenvalue {self.min_eigenvalue:.3e}")


def _deviation_second_moment(est: RidgeEstimator, ns_profile: MixedProfile, i: int,
                             alt) -> np.ndarray:
    """E[y_i y_i^T] under (profile with agent i fixed to alt)."""
    game = est.game
    supports = [ns_profile.support(j) for j in range(game.n)]
    count = 1
    for j in range(game.n):
        if j != i:
            count *= len(supports[j])
    if count > ENUMERATION_BUDGET:
        raise EnumerationBudgetError(count, ENUMERATION_BUDGET)
    nk = game.n * game.k
    out = np.zeros((nk, nk))
    ranges = [
        [alt] if j == i else [game.action_sets[j][int(t)] for t in supports[j]]
        for j in range(game.n)
    ]
    for a in itertools.product(*ranges):
        w = 1.0
        for j in range(game.n):
            if j != i:
                w *= ns_profile.probs[j][game.action_position(j, a[j])]
        y = co_membership_vector(game, a, i)
        out += w * np.outer(y, y)
    return out


def check_assumption2(est: RidgeEstimator, ns_profile: MixedProfile, c_act: float,
                      M: int = None, *, tol: float = 1e-8):
    """(ok, witness): is the fitted covariance at least as informative as
    M * c_act samples from any one-agent deviation off the stable profile.

    Pure deviations suffice: the deviation second moment is affine in the
    deviating agent's mixture and the semidefinite order is closed under
    convex combination.
    """
    game = est.game
    M = est.M if M is None else M
    for i in range(game.n):
        for alt in game.action_sets[i]:
            rhs = M * c_act * _deviation_second_moment(est, ns_profile, i, alt)
            w = np.linalg.eigvalsh(est.grams[i] - rhs)
            if w[0] < -tol:
                return False, CoverageEigenWitness(i, alt, float(w[0]))
    return True, None


def toggle_coverage_constant(n: int, k: int) -> float:
    """The coverage constant achieved by single-toggle exploration."""
    return 1.0 / (2.0 * n * k ** 4)


def coverage_sample_threshold(n: int, k: int, delta: float) -> float:
    """Dataset size above which single-toggle exploration covers every
    deviation direction with probability at least 1 - delta."""
    return 8.0 * (n * k + 1) * math.log((n * k + 1) / delta)


def one_toggle_policy(game: GameSpec, a_star) -> ExplorationPolicy:
    """Uniform over the anchor profile and every joint action where one
    agent joins or leaves exactly one coalition relative to it.

    Needs every anchor action to keep at least one coalition after any
    single removal, so |a*_i| >= 2 throughout.
    """
    a_star = validate_joint_action(game, a_star)
    support = [a_star]
    for i in range(game.n):
        if len(a_star[i]) < 2:
            raise PocfError(f"anchor action of agent {i + 1} must contain >= 2 coalitions")
        for l in range(game.k):
            toggled = a_star[i] ^ {l}
            a = a_star[:i] + (frozenset(toggled),) + a_star[i + 1:]
            validate_joint_action(game, a)
            support.append(a)
    w = 1.0 / len(support)
    return ExplorationPolicy.explicit(game, [(a, w) for a in support], label="one_toggle")


def theoretical_bound_bandit(n: int, k: int, beta: float, c_act: float, M: int,
                             eps_opt: float = 0.0) -> float:
    """High-probability gap bound for the aggregate-feedback pipeline."""
    if n < 1 or k < 1 or M < 1 or beta <= 0 or c_act <= 0:
        raise PocfError("n, k, M must be >= 1 and beta, c_act positive")
    return 4.0 * math.sqrt(n * n * k * beta / (c_act * M)) + eps_opt


def required_sample_size(n: int, k: int, beta: float, c_act: float, eps: float,
                         eps_opt: float = 0.0) -> float:
    """Smallest dataset size that drives the bound below eps; inf when
    eps does not exceed the optimization slack."""
    if eps <= eps_opt:
        return math.inf
    return 16.0 * n * n * k * beta / (c_act * (eps - eps_opt) ** 2)
