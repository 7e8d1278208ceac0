"""Command line front end; all subcommands emit JSON or CSV."""

from __future__ import annotations

import json
from pathlib import Path

import click
import numpy as np

from .bandit import RidgeEstimator, fit_ridge
from .builtins import builtin_game, builtin_names
from .data import game_from_fingerprint, load_game, read_dataset, sample_dataset, write_dataset
from .errors import PocfError
from .experiments import gap_trend_check, load_config, resolve_policy, run_experiment
from .games import STABILITY_TOL, GameSpec
from .oracle import better_response_dynamics, enumerate_pure_ns, verify_builtin
from .semibandit import SemiBanditEstimator, fit_semibandit
from .solver import SolverConfig, solve_mixed, solve_pure


def _load_game(spec: str) -> GameSpec:
    if Path(spec).exists():
        return load_game(spec)
    try:
        return builtin_game(spec)
    except PocfError:
        raise click.ClickException(
            f"{spec!r} is neither a game file nor one of {builtin_names()}"
        ) from None


def _action_out(a) -> list:
    return [sorted(l + 1 for l in ai) for ai in a]


def _action_in(raw, game: GameSpec):
    a = tuple(frozenset(l - 1 for l in ai) for ai in raw)
    if len(a) != game.n:
        raise click.ClickException(f"joint action needs {game.n} entries")
    return a


def _echo_json(obj) -> None:
    click.echo(json.dumps(obj, indent=2))


@click.group()
def main():
    """Offline stable-outcome learning for overlapping coalition games."""


@main.group()
def oracle():
    """Brute-force enumeration, dynamics, and certification."""


@oracle.command("enumerate")
@click.option("--game", "game_spec", required=True, help="game file or builtin name")
@click.option("--tol", default=STABILITY_TOL, show_default=True)
def oracle_enumerate(game_spec, tol):
    """List every stable pure joint action."""
    game = _load_game(game_spec)
    stable = enumerate_pure_ns(game, tol=tol)
    _echo_json({"count": len(stable), "stable": [_action_out(a) for a in stable]})


@oracle.command("dynamics")
@click.option("--game", "game_spec", required=True)
@click.option("--start", default=None, help="JSON joint action, 1-based; random if omitted")
@click.option("--seed", default=0, show_default=True)
def oracle_dynamics(game_spec, start, seed):
    """Run improving best-response dynamics to a stable profile."""
    game = _load_game(game_spec)
    rng = np.random.default_rng(seed)
    if start is None:
        a0 = tuple(acts[rng.integers(len(acts))] for acts in game.action_sets)
    else:
        a0 = _action_in(json.loads(start), game)
    res = better_response_dynamics(game, a0, rng)
    _echo_json({"start": _action_out(a0), "final": _action_out(res.final), "steps": res.steps})


@oracle.command("certify")
@click.option("--builtin", "name", required=True, help="builtin game name")
def oracle_certify(name):
    """Check a builtin game's stable set against its closed form."""
    rep = verify_builtin(name)
    _echo_json({
        "name": rep.name,
        "stable_count": rep.ns_count,
        "passed": rep.passed,
        "complete": rep.complete,
        "clauses": [
            {"description": c.description, "claimed": c.claimed, "holds": c.holds,
             "counterexamples": [_action_out(a) for a in c.counterexamples]}
            for c in rep.clauses
        ],
        "unclaimed": [_action_out(a) for a in rep.unclaimed],
    })


@main.command()
@click.option("--game", "game_spec", required=True)
@click.option("--policy", default="rand", show_default=True)
@click.option("--m", "-M", "m_records", type=int, required=True, help="number of records")
@click.option("--feedback", type=click.Choice(["semi", "bandit"]), default="semi",
              show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def generate(game_spec, policy, m_records, feedback, seed, out):
    """Sample a dataset from an exploration policy."""
    game = _load_game(game_spec)
    ds = sample_dataset(game, resolve_policy(policy), m_records, feedback, seed)
    write_dataset(ds, out)
    click.echo(f"wrote {len(ds)} records to {out}")


@main.command()
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--game", "game_spec", default=None,
              help="game file or builtin; defaults to the dataset's fingerprint")
@click.option("--feedback", type=click.Choice(["semi", "bandit"]), default=None,
              help="estimator family; defaults to the dataset's feedback")
@click.option("--delta", default=0.05, show_default=True)
@click.option("--out", required=True, type=click.Path())
def fit(dataset, game_spec, feedback, delta, out):
    """Fit the estimator for a dataset's feedback model."""
    ds = read_dataset(dataset)
    game = _load_game(game_spec) if game_spec else game_from_fingerprint(ds.meta["game"])
    feedback = feedback or ds.feedback
    if feedback == "semi":
        est = fit_semibandit(game, ds, delta)
    else:
        est = fit_ridge(game, ds, delta)
    Path(out).write_text(json.dumps(est.to_dict()) + "\n")
    click.echo(f"fitted {feedback} estimator on {len(ds)} records -> {out}")


@main.command()
@click.option("--est", "est_path", required=True, type=click.Path(exists=True))
@click.option("--game", "game_spec", required=True)
@click.option("--mode", type=click.Choice(["mixed", "pure"]), default="mixed",
              show_default=True)
@click.option("--mc", default=100, show_default=True, help="Monte Carlo samples")
@click.option("--stop", default=1e-3, show_default=True, help="stop threshold")
@click.option("--seed", default=0, show_default=True)
@click.option("--exact-gap", is_flag=True, help="also evaluate the true gap")
@click.option("--out", default=None, type=click.Path())
def solve(est_path, game_spec, mode, mc, stop, seed, exact_gap, out):
    """Minimize the surrogate gap over the fitted estimator."""
    game = _load_game(game_spec)
    doc = json.loads(Path(est_path).read_text())
    if doc.get("kind") == "semi":
        est = SemiBanditEstimator.from_dict(game, doc)
    else:
        est = RidgeEstimator.from_dict(game, doc)
    cfg = SolverConfig(mode=mode, mc_samples=mc, stop_threshold=stop, seed=seed)
    rep = (solve_pure if mode == "pure" else solve_mixed)(
        est, cfg, compute_exact_gap=exact_gap
    )
    payload = {
        "mode": mode,
        "surrogate_gap": rep.surrogate_gap,
        "exact_gap": rep.exact_gap,
        "rounds": rep.rounds,
        "stopped": rep.stopped,
        "eps_opt": rep.eps_opt,
        "regime": rep.regime,
        "profile": [list(map(float, p)) for p in rep.profile.probs],
        "actions": [[sorted(l + 1 for l in a) for a in acts] for acts in game.action_sets],
        "per_agent": [
            {"agent": i + 1, "best_response": sorted(l + 1 for l in act),
             "ucb": ucb, "lcb": lcb}
            for i, act, ucb, lcb in rep.per_agent
        ],
    }
    if rep.pure is not None:
        payload["pure"] = _action_out(rep.pure)
    if out:
        Path(out).write_text(json.dumps(payload, indent=2) + "\n")
        click.echo(f"wrote report to {out}")
    else:
        _echo_json(payload)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", default=None, type=click.Path())
def experiment(config_path, out):
    """Run a benchmark grid and write the results CSV."""
    cfg = load_config(config_path)
    rows = run_experiment(cfg, out)
    bad = sum(1 for r in rows if r.error)
    click.echo(f"wrote {len(rows)} rows to {out or cfg.output}"
               + (f" ({bad} with errors)" if bad else ""))


@main.command()
@click.option("--csv", "csv_path", required=True, type=click.Path(exists=True))
@click.option("--generator", default=None)
@click.option("--policy", default=None)
def trend(csv_path, generator, policy):
    """Summarize whether the gap shrinks with dataset size."""
    summary = gap_trend_check(csv_path, generator=generator, policy=policy)
    _echo_json({
        "passed": summary.passed,
        "verdict": summary.verdict,
        "groups": [
            {"n": g.n, "k": g.k,
             "mean_gap_first": g.first_mean, "M_first": g.first_M,
             "mean_gap_last": g.last_mean, "M_last": g.last_M,
             "passed": g.passed}
            for g in summary.groups
        ],
    })


if __name__ == "__main__":
    main()
