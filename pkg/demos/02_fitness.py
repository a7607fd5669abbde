"""
ORDER and MAJORITY
==================

ORDER rewards x_i when it is met before ~x_i in a left-to-right scan.
MAJORITY rewards x_i when it occurs at least once and at least as often as ~x_i.
"""
from hvlgp.problems import DeficitProfile, is_stuck_gpstar_single_majority, majority_fitness, order_fitness
from hvlgp.tree import term_str

leaves = [1, -4, 2, -1, 3, -6]
f, path = order_fitness(leaves, 6)
print("ORDER leaves :", " ".join(map(term_str, leaves)))
print("  path       :", " ".join(map(str, path)), " fitness", f)

leaves = [1, -4, 2, -1, -3, -6, 1, 4]
f, prof = majority_fitness(leaves, 6)
print("MAJORITY     : expressed", " ".join(map(str, prof.expressed_set())), " fitness", f)
print("  deficits D_i = c(~x_i) - c(x_i):", prof.deficits())

# A strict single-move climber is trapped once every missing variable has
# a deficit of 3 or more: one move shifts a deficit by at most 2.
for counts in ([1, 2, -3, -3, -3, -3], [1, 2, -3, -3], [1, -2, -2, -2, 3, -3]):
    p = DeficitProfile.from_leaves(counts, 3)
    print(f"  {counts!s:28s} D={p.deficits()} stuck={is_stuck_gpstar_single_majority(p, 3)}")
