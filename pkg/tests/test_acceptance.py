"""End-to-end acceptance criteria, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL ...`` line (shown even
under pytest's output capture) and then asserts. Run just this file with
``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""
import random
import sys
import time
from fractions import Fraction

import pytest

from hvlgp.engine import RunConfig, Status, run
from hvlgp.harness import fit_scaling_exponent, preset, rows_to_csv, run_experiment
from hvlgp.oracles import (
    crosscheck_stuck, enumerate_single_mutations, check_insert_bound, check_sdp,
    insert_bound_instances, monte_carlo_improving, multiset_trees,
)
from hvlgp.problems import majority_fitness, order_fitness
from hvlgp.tree import parse_tree

_capman = None


@pytest.fixture(autouse=True)
def _grab_capture(request):
    global _capman
    _capman = request.config.pluginmanager.getplugin("capturemanager")


def report(num: int, ok: bool, seconds: float, detail: str) -> None:
    line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  ({seconds:.2f}s)  {detail}"
    if _capman is not None:
        with _capman.global_and_fixture_disabled():
            print("\n" + line, flush=True)
    else:
        print(line, flush=True)


def test_criterion_01_worked_examples():
    t0 = time.perf_counter()
    f_ord, path = order_fitness([1, -4, 2, -1, 3, -6], 6)
    t_ord = time.perf_counter() - t0
    t0 = time.perf_counter()
    f_maj, prof = majority_fitness([1, -4, 2, -1, -3, -6, 1, 4], 6)
    t_maj = time.perf_counter() - t0
    ok = (
        f_ord == 3 and [str(t) for t in path] == ["x1", "~x4", "x2", "x3", "~x6"]
        and f_maj == 3 and [str(t) for t in prof.expressed_set()] == ["x1", "x2", "x4"]
        and t_ord < 1e-3 and t_maj < 1e-3
    )
    report(1, ok, t_ord + t_maj,
           f"ORDER f={f_ord} P=({', '.join(map(str, path))}) in {t_ord * 1e6:.0f}us; "
           f"MAJORITY f={f_maj} S={{{', '.join(map(str, prof.expressed_set()))}}} in {t_maj * 1e6:.0f}us")
    assert ok


def test_criterion_02_operator_distribution():
    t0 = time.perf_counter()
    tree = parse_tree("(J ~x1 x1)", 1)
    exact = enumerate_single_mutations(tree, "order", 1).improving_mass()
    draws = 1_000_000
    hits = monte_carlo_improving(tree, "order", 1, draws, random.Random(20240611))
    secs = time.perf_counter() - t0
    p = float(exact)
    sigma = (draws * p * (1 - p)) ** 0.5
    z = (hits - draws * p) / sigma
    ok = exact == Fraction(11, 36) and abs(z) <= 3 and secs < 10
    report(2, ok, secs, f"exact={exact} mc={hits}/{draws} z={z:+.2f} (limit 10s)")
    assert ok


def test_criterion_03_insertion_bound():
    t0 = time.perf_counter()
    reps = [check_insert_bound(t, n) for t, n in insert_bound_instances(200, 6, seed=1)]
    secs = time.perf_counter() - t0
    fails = [r for r in reps if not r.passed]
    ratio = min(r.exact / r.bound for r in reps if r.applicable and r.bound > 0)
    ok = len(reps) == 200 and not fails and secs < 30
    report(3, ok, secs, f"{len(reps) - len(fails)}/{len(reps)} instances satisfy the bound; "
                        f"min exact/bound = {float(ratio):.3f} (limit 30s)")
    assert ok


def test_criterion_04_sdp():
    # T = 1 is reported separately: deleting the only leaf is a no-op, so the
    # compound move degenerates to a bare insertion there
    t0 = time.perf_counter()
    results = [(t.leaf_count, n, check_sdp(t, n)) for n in (1, 2, 3) for t in multiset_trees(6, n)]
    secs = time.perf_counter() - t0
    multi = [r for r in results if r[0] >= 2]
    single = [r for r in results if r[0] == 1]
    ok = all(r[2] for r in multi) and secs < 60
    report(4, ok, secs,
           f"T=2..6: {sum(r[2] for r in multi)}/{len(multi)} leaf multisets agree exactly; "
           f"T=1: {sum(r[2] for r in single)}/{len(single)} (excluded, vacuous deletion) (limit 60s)")
    assert ok


def test_criterion_05_t_lopt():
    t0 = time.perf_counter()
    single = [
        run(RunConfig("majority", n, "strict", "single", init="t-lopt", seed=s))
        for n in range(2, 13) for s in range(3)
    ]
    single_ok = all(r.status is Status.STUCK and r.final_fitness == r.n - 1 for r in single)
    rows, (summ,) = run_experiment(preset("tlopt-multi"))
    exhausted = sum(r.status == Status.BUDGET_EXHAUSTED.value for r in rows)
    secs = time.perf_counter() - t0
    ok = single_ok and exhausted >= 99 and secs < 300
    report(5, ok, secs, f"single n=2..12 x3 seeds all Stuck at n-1: {single_ok}; "
                        f"multi n=20: {exhausted}/100 BudgetExhausted at 10^6 (limit 300s)")
    assert ok


def test_criterion_06_fig3_stuck_fraction():
    t0 = time.perf_counter()
    _, summary = run_experiment(preset("fig3", n_values=(10, 20, 50)))
    secs = time.perf_counter() - t0
    fr = {s.n: s.stuck_fraction for s in summary}
    ok = all(v >= 0.05 for v in fr.values()) and secs < 300
    report(6, ok, secs, "stuck fraction " + ", ".join(f"n={n}: {v:.2f}" for n, v in fr.items())
           + " (threshold 0.05, limit 300s)")
    assert ok


def test_criterion_07_fig2_scaling():
    t0 = time.perf_counter()
    rows, summary = run_experiment(preset("fig2"))
    secs = time.perf_counter() - t0
    all_opt = all(r.status == Status.OPTIMAL.value for r in rows)
    means = [s.mean_evaluations for s in summary]
    monotone = all(a < b for a, b in zip(means, means[1:]))
    fit = fit_scaling_exponent(summary)
    ok = all_opt and monotone and 0.9 < fit.exponent < 2.0 and secs < 600
    report(7, ok, secs, f"all Optimal: {all_opt}; means {[round(m) for m in means]} monotone: {monotone}; "
                        f"exponent {fit.exponent:.3f} in (0.9, 2.0) (limit 600s)")
    assert ok


def test_criterion_08_order_scaling():
    t0 = time.perf_counter()
    rows, summary = run_experiment(preset("order-scaling"))
    secs = time.perf_counter() - t0
    all_opt = all(r.status == Status.OPTIMAL.value for r in rows)
    worst = max(r.t_max_nodes - (4 * r.n - 1 + 2 * r.n) for r in rows)
    fit = fit_scaling_exponent(summary)
    ok = all_opt and worst <= 0 and fit.exponent <= 2.3 and secs < 600
    report(8, ok, secs, f"all Optimal: {all_opt}; max(T_max - (S_init + 2n)) = {worst}; "
                        f"exponent {fit.exponent:.3f} <= 2.3 (limit 600s)")
    assert ok


def test_criterion_09_stuck_characterization():
    t0 = time.perf_counter()
    checks = [crosscheck_stuck(t, n) for n in (1, 2, 3) for t in multiset_trees(8, n)]
    secs = time.perf_counter() - t0
    bad = sum(not c.agrees for c in checks)
    ok = bad == 0 and secs < 120
    report(9, ok, secs, f"{len(checks) - bad}/{len(checks)} leaf multisets agree "
                        f"({sum(c.predicted for c in checks)} stuck) (limit 120s)")
    assert ok


def test_criterion_10_determinism():
    t0 = time.perf_counter()
    a = rows_to_csv(run_experiment(preset("fig3", master_seed=7))[0])
    b = rows_to_csv(run_experiment(preset("fig3", master_seed=7))[0])
    secs = time.perf_counter() - t0
    ok = a == b and a.count("\n") == 501 and secs < 600
    report(10, ok, secs, f"two fig3 runs, {a.count(chr(10)) - 1} rows, byte-identical: {a == b} (limit 600s)")
    assert ok


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
