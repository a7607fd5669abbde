"""
Trees and the three sub-operations
==================================

Solutions are binary trees of joins ``J`` with signed variables at the
leaves. Only the left-to-right (inorder) leaf list matters for fitness,
but mutation acts on the tree, so shape still shapes the search.
"""
import random

from hvlgp.tree import Terminal, hvl_prime_step, parse_tree

# parse the canonical text form; n bounds the variable indices
tree = parse_tree("(J (J x1 ~x4) (J x2 ~x1))", 4)
print(tree, "leaves:", [str(t) for t in tree.inorder_leaves()])
print("T =", tree.leaf_count, " S =", tree.node_count, " depth =", tree.depth())

# substitute: overwrite one leaf's terminal
rec = tree.substitute(tree.leaf_at(3), Terminal(3))
print("substitute ->", tree, "|", rec.describe())

# insert: a new join takes the chosen node's place, the new leaf on one side
rec = tree.insert(tree.leaf_at(0), Terminal(2, negated=True), "left")
print("insert     ->", tree, "|", rec.describe())

# delete: remove a leaf and its parent, the sibling moves up
rec = tree.delete(tree.leaf_at(2))
print("delete     ->", tree, "|", rec.describe())

# deleting the only leaf of a one-leaf tree does nothing and says so
lone = parse_tree("x1")
print("lone delete:", lone.delete(lone.leaf_at(0)).describe(), "->", lone)

# HVL-Mutate' picks one of the three uniformly; records can be replayed
rng = random.Random(4)
twin = tree.copy()
for _ in range(6):
    rec = hvl_prime_step(tree, rng, 4)
    twin.replay(rec)
    print(f"{rec.describe():32s} {tree}")
assert twin == tree
tree.audit()  # full recount of sizes, parents and the leaf index
