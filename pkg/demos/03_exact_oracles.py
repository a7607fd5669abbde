"""
Exact probabilities for one mutation step
=========================================

Small trees can be mutated in every possible way. Each outcome gets an
exact rational probability, so claims about the operator become equalities.
"""
import random

from hvlgp.oracles import (
    check_insert_bound, check_sdp, crosscheck_stuck, enumerate_single_mutations, monte_carlo_improving,
)
from hvlgp.initializers import init_t_lopt
from hvlgp.tree import DELETE, INSERT, SUBSTITUTE, parse_tree

tree = parse_tree("(J ~x1 x1)", 1)
dist = enumerate_single_mutations(tree, "order", 1)
print(f"{len(dist.outcomes)} outcomes, total probability {dist.total()}")
for op in (SUBSTITUTE, INSERT, DELETE):
    print(f"  improving via {op:10s} {dist.improving_mass(op)}")
print("  improving overall     ", dist.improving_mass())

# the engine's sampler agrees with the enumeration
draws = 200_000
hits = monte_carlo_improving(tree, "order", 1, draws, random.Random(0))
print(f"Monte Carlo: {hits / draws:.4f} vs {float(dist.improving_mass()):.4f}")

# insertion alone improves ORDER at least as often as the explicit bound says
rep = check_insert_bound(parse_tree("(J (J ~x2 x3) (J ~x1 ~x3))", 3), 3)
print("insertion bound:", rep.details(), "passed" if rep.passed else "FAILED")

# substitution and delete-then-insert move MAJORITY fitness identically
print("sdp (J x1 ~x2), n=2:", check_sdp(parse_tree("(J x1 ~x2)"), 2))
print("sdp x1, n=1 (single leaf, deletion is vacuous):", check_sdp(parse_tree("x1"), 1))

# the deficit rule for being stuck agrees with brute force
for t, n in ((init_t_lopt(3), 3), (parse_tree("(J ~x1 ~x1)"), 1)):
    print(f"stuck? {t}: {crosscheck_stuck(t, n)}")
