"""
The four hill climbers
======================

(1+1) GP accepts equal fitness, (1+1) GP* demands strict improvement.
"single" applies one sub-operation per offspring, "multi" applies
1 + Poisson(1) of them before a single evaluation.
"""
from hvlgp.engine import RunConfig, run

n = 12
for acc in ("nonstrict", "strict"):
    for ops in ("single", "multi"):
        budget = 0 if (acc, ops) in (("nonstrict", "single"), ("strict", "single")) else 200_000
        res = run(RunConfig("majority", n, acc, ops, seed=3, budget=budget))
        print(f"MAJORITY {acc:9s} {ops:6s}: {res.status.value:16s} evals={res.evaluations:7d} "
              f"fitness={res.final_fitness} T_max={res.t_max}")

# accepted moves can be traced and replayed
res = run(RunConfig("order", 6, "strict", "single", seed=1, trace_level=1))
print(f"\nORDER n=6 strict single: {res.status.value} after {res.evaluations} evaluations")
print("evals  ops  f_old -> f_new")
for line in res.trace:
    evals, ops, f_old, f_new, _ = line.split("\t")
    print(f"{evals:>5}  {ops:34s} {f_old} -> {f_new}")
print("final tree:", res.final_tree)
