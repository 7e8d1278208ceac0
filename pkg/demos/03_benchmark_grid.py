"""
Benchmark grid and the convergence trend
========================================

Runs a small (n, k, M, seed) grid end to end, writes the results CSV,
and summarizes whether the surrogate gap shrinks with dataset size.
The same CSV feeds the plotting package in figures/.
"""

from pathlib import Path

from pocf import SolverConfig
from pocf.experiments import ExperimentConfig, gap_trend_check, run_experiment

out_dir = Path(__file__).resolve().parent / "out"
out_dir.mkdir(exist_ok=True)

# --- 1. the positive direction: uniform exploration ------------------------

# Uniform exploration covers every coalition size, so more data means a
# smaller surrogate gap. Full-step updates keep the solver fast here.
cfg = ExperimentConfig(
    generator="gaussian",
    policy="rand",
    feedback="semi",
    n_grid=(3, 4),
    k_grid=(2,),
    M_grid=(50, 400, 3200),
    seeds=(0, 1, 2),
    solver=SolverConfig(eta=1.0, max_rounds=50, stop_threshold=1e-9),
    output=str(out_dir / "results.csv"),
)
rows = run_experiment(cfg)
errors = sum(1 for r in rows if r.error)
print(f"wrote {len(rows)} rows to {cfg.output} ({errors} errors)")

summary = gap_trend_check(cfg.output, generator="gaussian", policy="rand")
print("verdict:", summary.verdict)
for g in summary.groups:
    print(f"  n={g.n} k={g.k}: mean gap {g.first_mean:.3f} at M={g.first_M} "
          f"-> {g.last_mean:.3f} at M={g.last_M}")

# --- 2. the negative control: a policy that pins coalition sizes -----------

# one_rand fixes every agent but the first, so whole coalition sizes go
# unobserved, the bonus there never shrinks, and the trend check reports
# the failure as expected rather than as a regression.
neg = ExperimentConfig(
    generator="size_uniform",
    policy="one_rand",
    feedback="semi",
    n_grid=(3,),
    k_grid=(2,),
    M_grid=(50, 400, 3200),
    seeds=(0, 1, 2),
    solver=SolverConfig(eta=1.0, max_rounds=50, stop_threshold=1e-9),
    output=str(out_dir / "results_one_rand.csv"),
)
run_experiment(neg)
print("\none_rand control:", gap_trend_check(neg.output).verdict)

# Scale the grids up (n_grid, M_grid, seeds) to reproduce the full
# figure; the CSV schema is stable either way. Render with:
#   cd figures && npm run plot -- --csv ../demos/out/results.csv --group-by n --out figs/
