"""
Seeded experiments and scaling fits
===================================

A preset names a template run and a sweep over n; every trial gets its
own seed from (master seed, n, trial), so results do not depend on order
or on the number of workers.
"""
import tempfile
from pathlib import Path

from hvlgp.harness import fit_scaling_exponent, preset, run_experiment

# GP-single from 2n copies of ~x1: always solves MAJORITY, a little above linear time
cfg = preset("fig2", n_values=(8, 16, 32, 64), trials_per_n=20)
rows, summary = run_experiment(cfg)
for s in summary:
    print(f"n={s.n:3d} mean={s.mean_evaluations:8.1f} std={s.std_evaluations:7.1f}")
fit = fit_scaling_exponent(summary)
print(f"evaluations ~ n^{fit.exponent:.2f}")

# GP*-single from random trees: a sizeable share of runs gets stuck for good
_, summary = run_experiment(preset("fig3", n_values=(10, 20, 30), trials_per_n=60))
for s in summary:
    print(f"n={s.n:3d} stuck={s.stuck_fraction:.2f} solved-mean={s.mean_evaluations:.0f}")

# files: per-trial CSV, per-n summary, and "n mean std" plot data
out = Path(tempfile.mkdtemp())
run_experiment(preset("fig3", n_values=(10, 20), trials_per_n=5, output=str(out)))
for p in sorted(out.iterdir()):
    print(p.name, "|", p.read_text().splitlines()[0])
