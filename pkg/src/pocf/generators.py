"""Random game constructors.

Five named generators produce games at a given (n, k):

- ``uniform``: every sampled mutual utility is an independent draw from
  U[-1, 1]; all means are zero.
- ``gaussian``: each unordered agent pair owns a latent mean mu drawn once
  per game from U[-1, 1]; samples are N(mu, sigma) clamped to [-1, 1] with
  sigma = 1 - mu for mu >= 0 and 1 + mu otherwise.
- ``size_uniform`` / ``size_gaussian``: as above, but every sample is scaled
  by |C_l| / (n + 1), so utilities grow with the realized coalition size.
- ``mixed_effects``: a fixed k = 5 game where coalition 1 rewards small
  memberships, coalition 5 rewards large ones, coalitions 2 and 4 are
  always costly, and coalition 3 is neutral; a per-table Gaussian shock is
  shared by all pairs of a coalition.

Games report means as the exact expectation of their sampling law, so for
clamped Gaussians the mean is the clamped-normal expectation, not the raw
mu. Unless explicit action sets are given, all agents share one ordered
action set sampled uniformly from the nonempty subsets of the labels.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import PocfError
from .games import GameSpec, NoiseLaw, as_action

GENERATOR_KINDS = ("uniform", "gaussian", "size_uniform", "size_gaussian", "mixed_effects")

#: Fixed shared action set of the mixed_effects generator (zero-based labels).
MIXED_EFFECTS_ACTIONS = (
    frozenset([0, 1]),
    frozenset([0, 2, 4]),
    frozenset([3, 4]),
)


def clamped_normal_mean(mu: float, sigma: float, lo: float = -1.0, hi: float = 1.0) -> float:
    """Exact mean of a normal draw clamped to [lo, hi]."""
    if sigma == 0.0:
        return min(max(mu, lo), hi)
    a = (lo - mu) / sigma
    b = (hi - mu) / sigma
    cdf = lambda x: 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))
    pdf = lambda x: math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    return (
        lo * cdf(a)
        + hi * (1.0 - cdf(b))
        + mu * (cdf(b) - cdf(a))
        - sigma * (pdf(b) - pdf(a))
    )


def gaussian_sigma(mu):
    return np.where(np.asarray(mu) >= 0.0, 1.0 - np.asarray(mu), 1.0 + np.asarray(mu))


def mixed_effects_base(l: int, size: int, n: int) -> float:
    """Pre-shock pair mean of the mixed_effects generator."""
    if l == 0:
        return 1.0 - size / (n + 1)
    if l in (1, 3):
        return -1.0
    if l == 2:
        return 0.0
    if l == 4:
        return size / (n + 1)
    raise PocfError(f"mixed_effects has 5 coalitions, got label {l + 1}")


def sample_shared_action_set(k: int, count: int, rng: np.random.Generator) -> tuple:
    """Ordered sample of distinct nonempty subsets of range(k)."""
    count = min(count, 2**k - 1)
    out = []
    seen = set()
    while len(out) < count:
        bits = rng.integers(0, 2, size=k)
        a = frozenset(int(l) for l in range(k) if bits[l])
        if a and a not in seen:
            seen.add(a)
            out.append(a)
    return tuple(out)


_KIND_IDS = {kind: t for t, kind in enumerate(GENERATOR_KINDS)}


def make_game(
    kind: str,
    n: int,
    k: int,
    *,
    seed: int = 0,
    action_sets=None,
    action_set_size: int = 3,
) -> GameSpec:
    """Build a game from one of the named generators, reproducibly from seed."""
    if kind not in GENERATOR_KINDS:
        raise PocfError(f"unknown generator {kind!r}; choose from {GENERATOR_KINDS}")
    source = {"kind": kind, "n": n, "k": k, "seed": int(seed)}

    if kind == "mixed_effects":
        if k != 5:
            raise PocfError("mixed_effects requires k = 5")
        acts = (MIXED_EFFECTS_ACTIONS,) * n
        mean_of_shifted = {}
        for l in range(5):
            for s in range(2, n + 1):
                mean_of_shifted[(l, s)] = clamped_normal_mean(mixed_effects_base(l, s, n), 1.0)

        def mean_law(i, j, l, s, _tab=mean_of_shifted):
            return _tab[(l, s)]

        noise = NoiseLaw(
            kind="shared_shift",
            shift_base=lambda l, s, n=n: mixed_effects_base(l, s, n),
        )
        return GameSpec(n=n, k=5, action_sets=acts, mean_law=mean_law, noise=noise,
                        meta={"source": source})

    ss = np.random.SeedSequence(entropy=[0x706F6366, _KIND_IDS[kind], n, k, int(seed)])
    rng_actions, rng_params = (np.random.default_rng(c) for c in ss.spawn(2))

    if action_sets is None:
        shared = sample_shared_action_set(k, action_set_size, rng_actions)
        acts = (shared,) * n
        source["action_set_size"] = action_set_size
    else:
        acts = tuple(tuple(as_action(a) for a in per) for per in action_sets)
        source["action_sets"] = [
            [sorted(l + 1 for l in a) for a in per] for per in acts
        ]

    scale = (lambda s: s / (n + 1)) if kind.startswith("size_") else (lambda s: 1.0)

    if kind in ("uniform", "size_uniform"):
        mean_law = lambda i, j, l, s: 0.0

        def draw_pairs(rng, l, s, ii, jj, _scale=scale):
            return _scale(s) * rng.uniform(-1.0, 1.0, size=len(ii))

    else:
        mu = np.zeros((n, n))
        upper = np.triu_indices(n, 1)
        mu[upper] = rng_params.uniform(-1.0, 1.0, size=len(upper[0]))
        mu = mu + mu.T
        cm = np.zeros((n, n))
        for i, j in zip(*upper):
            cm[i, j] = cm[j, i] = clamped_normal_mean(mu[i, j], float(gaussian_sigma(mu[i, j])))

        def mean_law(i, j, l, s, _cm=cm, _scale=scale):
            return _scale(s) * _cm[i, j] if i != j else 0.0

        def draw_pairs(rng, l, s, ii, jj, _mu=mu, _scale=scale):
            m = _mu[ii, jj]
            u = np.clip(rng.normal(m, gaussian_sigma(m)), -1.0, 1.0)
            return _scale(s) * u

    noise = NoiseLaw(kind="pair_iid", draw_pairs=draw_pairs)
    return GameSpec(n=n, k=k, action_sets=acts, mean_law=mean_law, noise=noise,
                    meta={"source": source})
