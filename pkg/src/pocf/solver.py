"""Surrogate duality-gap minimization over fitted estimators.

The mixed solver sweeps agents in index order, mixing each strategy toward
an optimistic best response; the pure solver minimizes the same objective
over deterministic profiles, exhaustively when the joint space fits the
enumeration budget and by restarted local search otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import PocfError
from .games import (
    ENUMERATION_BUDGET,
    GameSpec,
    MixedProfile,
    _expect_vector,
    exact_duality_gap,
    mean_utilities,
    validate_joint_action,
)


@dataclass(frozen=True)
class ExactModel:
    """Estimator stand-in carrying the true means and zero bonuses.

    Collapses the surrogate gap to the exact gap; used for unit checks and
    clean-room demos.
    """

    game: GameSpec

    def estimate(self, a) -> np.ndarray:
        return mean_utilities(self.game, a)

    def bonus(self, a) -> np.ndarray:
        return np.zeros(self.game.n)

    def ucb_lcb(self, a):
        est = self.estimate(a)
        return est, est.copy()

    def mean_tables(self, space) -> np.ndarray:
        return space.mean_table

    def bonus_tables(self, space) -> np.ndarray:
        return np.zeros((space.size, self.game.n))


@dataclass(frozen=True)
class SolverConfig:
    mode: str = "mixed"
    mc_samples: int = 100
    stop_threshold: float = 1e-3
    max_rounds: int = 500
    eta: float = None            # fixed mixing weight; None = 2/(t+2)
    enumeration_budget: int = ENUMERATION_BUDGET
    seed: int = 0
    sweep: str = "sequential"    # or "shuffled"
    restarts: int = 8            # pure-mode local search only

    def __post_init__(self):
        if self.mode not in ("mixed", "pure"):
            raise PocfError(f"mode must be mixed or pure, got {self.mode!r}")
        if self.mc_samples < 1 or self.max_rounds < 1 or self.stop_threshold <= 0:
            raise PocfError("mc_samples, max_rounds must be >= 1 and stop_threshold > 0")
        if self.eta is not None and not 0 < self.eta <= 1:
            raise PocfError(f"eta must be in (0, 1], got {self.eta}")
        if self.sweep not in ("sequential", "shuffled"):
            raise PocfError(f"sweep must be sequential or shuffled, got {self.sweep!r}")


@dataclass(frozen=True)
class GapReport:
    profile: MixedProfile
    surrogate_gap: float
    per_agent: tuple          # (agent, best-response action, UCB value, expected LCB)
    rounds: int
    exact_eval: bool          # exact expectations vs Monte Carlo
    stopped: str = "evaluated"
    exact_gap: float = None
    bound: float = None
    eps_opt: float = None
    regime: str = None        # pure mode: exhaustive | local_search
    pure: tuple = None        # pure mode: the minimizing joint action

    def with_bound(self, bound: float) -> "GapReport":
        return replace(self, bound=bound)


class _Evaluator:
    """Shared surrogate evaluation; precomputes UCB/LCB tables when the
    joint space is enumerable, otherwise falls back to Monte Carlo."""

    def __init__(self, est, cfg: SolverConfig, rng=None):
        self.est = est
        self.game: GameSpec = est.game
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed) if rng is None else rng
        self.exact = self.game.space_size <= cfg.enumeration_budget
        if self.exact:
            self.space = self.game.space
            mean = est.mean_tables(self.space)
            bon = est.bonus_tables(self.space)
            self.ucb_tab = mean + bon
            self.lcb_tab = mean - bon

    def best_response(self, phi: MixedProfile, i: int):
        """(position, value) of agent i's optimistic best response; ties
        go to the lowest action index."""
        vec = self._ucb_vector(phi, i)
        p = int(np.argmax(vec))
        return p, float(vec[p])

    def _ucb_vector(self, phi: MixedProfile, i: int) -> np.ndarray:
        if self.exact:
            return np.asarray(_expect_vector(self.ucb_tab[:, i], self.space, phi, i))
        acts = self.game.action_sets[i]
        totals = np.zeros(len(acts))
        draws = [phi.sample(self.game, self.rng) for _ in range(self.cfg.mc_samples)]
        for a in draws:
            for p, alt in enumerate(acts):
                ucb, _ = self.est.ucb_lcb(a[:i] + (alt,) + a[i + 1:])
                totals[p] += ucb[i]
        return totals / len(draws)

    def _lcb_value(self, phi: MixedProfile, i: int) -> float:
        if self.exact:
            vec = _expect_vector(self.lcb_tab[:, i], self.space, phi, i)
            return float(np.asarray(vec) @ phi.probs[i])
        total = 0.0
        for _ in range(self.cfg.mc_samples):
            a = phi.sample(self.game, self.rng)
            _, lcb = self.est.ucb_lcb(a)
            total += lcb[i]
        return total / self.cfg.mc_samples

    def report(self, phi: MixedProfile, rounds: int = 0, stopped: str = "evaluated") -> GapReport:
        per_agent = []
        worst = 0.0
        for i in range(self.game.n):
            p, ucb = self.best_response(phi, i)
            lcb = self._lcb_value(phi, i)
            per_agent.append((i, self.game.action_sets[i][p], ucb, lcb))
            worst = max(worst, ucb - lcb)
        return GapReport(profile=phi, surrogate_gap=worst, per_agent=tuple(per_agent),
                         rounds=rounds, exact_eval=self.exact, stopped=stopped)

    def pure_gap_vector(self) -> np.ndarray:
        """Surrogate gap of every pure profile at once (exact mode only)."""
        if getattr(self, "_pure_gaps", None) is not None:
            return self._pure_gaps
        size = self.space.size
        s = np.arange(size)
        out = np.zeros(size)
        for i in range(self.game.n):
            best = np.full(size, -np.inf)
            for p in range(self.space.counts[i]):
                np.maximum(best, self.ucb_tab[self.space.deviation_index(s, i, p), i], out=best)
            np.maximum(out, best - self.lcb_tab[:, i], out=out)
        self._pure_gaps = out
        return out

    def pure_gap(self, a) -> float:
        a = validate_joint_action(self.game, a)
        if self.exact:
            return float(self.pure_gap_vector()[self.space.index_of(a)])
        worst = 0.0
        for i in range(self.game.n):
            _, lcb = self.est.ucb_lcb(a)
            best = -np.inf
            for alt in self.game.action_sets[i]:
                ucb, _ = self.est.ucb_lcb(a[:i] + (alt,) + a[i + 1:])
                best = max(best, ucb[i])
            worst = max(worst, best - lcb[i])
        return worst


def optimistic_best_response(est, phi: MixedProfile, i: int,
                             cfg: SolverConfig = None, rng=None):
    """(action, value) maximizing the expected UCB over pure switches of
    agent i; pure switches suffice since the objective is linear in phi_i."""
    cfg = cfg or SolverConfig()
    ev = _Evaluator(est, cfg, rng)
    p, value = ev.best_response(phi, i)
    return est.game.action_sets[i][p], value


def surrogate_gap(est, phi: MixedProfile, cfg: SolverConfig = None, *,
                  compute_exact_gap: bool = False, rng=None) -> GapReport:
    """Optimistic-minus-pessimistic gap estimate of a profile."""
    cfg = cfg or SolverConfig()
    rep = _Evaluator(est, cfg, rng).report(phi)
    if compute_exact_gap:
        rep = replace(rep, exact_gap=_exact_gap_or_none(est.game, phi))
    return rep


def _exact_gap_or_none(game: GameSpec, phi: MixedProfile) -> float:
    if game.space_size > ENUMERATION_BUDGET:
        return None
    return exact_duality_gap(game, phi).gap


def solve_mixed(est, cfg: SolverConfig = None, *, compute_exact_gap: bool = False) -> GapReport:
    """Coordinate-descent on the surrogate gap over mixed profiles.

    Starts uniform; each round sweeps agents in index order, mixing each
    strategy toward the point mass on her optimistic best response against
    the already-updated profile. Returns the best profile seen, evaluated
    after every round, never the last iterate.
    """
    cfg = cfg or SolverConfig()
    if cfg.mode != "mixed":
        raise PocfError("solve_mixed needs cfg.mode == 'mixed'")
    game = est.game
    rng = np.random.default_rng(cfg.seed)
    ev = _Evaluator(est, cfg, rng)
    phi = MixedProfile.uniform(game)
    best = ev.report(phi, rounds=0)
    prev_gap = best.surrogate_gap
    stopped = "max_rounds"
    rounds = 0
    for t in range(1, cfg.max_rounds + 1):
        rounds = t
        eta = cfg.eta if cfg.eta is not None else 2.0 / (t + 2.0)
        order = list(range(game.n))
        if cfg.sweep == "shuffled":
            rng.shuffle(order)
        for i in order:
            p, _ = ev.best_response(phi, i)
            target = np.zeros(len(game.action_sets[i]))
            target[p] = 1.0
            phi = phi.with_agent(i, (1.0 - eta) * phi.probs[i] + eta * target)
        rep = ev.report(phi, rounds=t)
        if rep.surrogate_gap < best.surrogate_gap:
            best = rep
        if prev_gap - rep.surrogate_gap < cfg.stop_threshold:
            stopped = "converged"
            break
        prev_gap = rep.surrogate_gap
    eps_opt = None
    if ev.exact:
        eps_opt = float(best.surrogate_gap - ev.pure_gap_vector().min())
    best = replace(best, rounds=rounds, stopped=stopped, eps_opt=eps_opt)
    if compute_exact_gap:
        best = replace(best, exact_gap=_exact_gap_or_none(game, best.profile))
    return best


def solve_pure(est, cfg: SolverConfig = None, *, compute_exact_gap: bool = False) -> GapReport:
    """Minimize the surrogate gap over pure profiles."""
    cfg = cfg or SolverConfig(mode="pure")
    if cfg.mode != "pure":
        raise PocfError("solve_pure needs cfg.mode == 'pure'")
    game = est.game
    rng = np.random.default_rng(cfg.seed)
    ev = _Evaluator(est, cfg, rng)
    if ev.exact:
        gaps = ev.pure_gap_vector()
        s = int(np.argmin(gaps))
        a = ev.space.action_at(s)
        rep = ev.report(MixedProfile.point_mass(game, a))
        rep = replace(rep, regime="exhaustive", pure=a, eps_opt=0.0,
                      stopped="exhausted", rounds=1)
    else:
        best_a, best_gap = None, np.inf
        for _ in range(cfg.restarts):
            a = tuple(acts[rng.integers(len(acts))] for acts in game.action_sets)
            gap = ev.pure_gap(a)
            for _step in range(cfg.max_rounds):
                cand = None
                for i in range(game.n):
                    for alt in game.action_sets[i]:
                        if alt == a[i]:
                            continue
                        b = a[:i] + (alt,) + a[i + 1:]
                        g = ev.pure_gap(b)
                        if g < gap - 1e-12 and (cand is None or g < cand[1]):
                            cand = (b, g)
                if cand is None:
                    break
                a, gap = cand
            if gap < best_gap:
                best_a, best_gap = a, gap
        rep = ev.report(MixedProfile.point_mass(game, best_a))
        rep = replace(rep, regime="local_search", pure=best_a, stopped="restarts_done",
                      rounds=cfg.restarts)
    if compute_exact_gap:
        rep = replace(rep, exact_gap=_exact_gap_or_none(game, rep.profile))
    return rep
