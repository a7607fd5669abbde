import random
from fractions import Fraction
from math import e

import pytest

from hvlgp.initializers import init_t_lopt
from hvlgp.oracles import (
    E_LOWER, EnumerationTooLarge, all_trees, check_insert_bound, check_sdp, crosscheck_stuck,
    enumerate_single_mutations, insert_bound, monte_carlo_improving, multiset_trees,
    run_insert_bound_check, sdp_distributions,
)
from hvlgp.problems import order_value
from hvlgp.tree import DELETE, INSERT, SUBSTITUTE, GpTree, parse_tree


def test_e_lower_is_a_lower_bound():
    assert E_LOWER < Fraction(e) and float(E_LOWER) > e - 1e-10


def test_operator_distribution_hand_count():
    dist = enumerate_single_mutations(parse_tree("(J ~x1 x1)"), "order", 1)
    assert dist.total() == 1
    assert dist.improving_mass() == Fraction(11, 36)
    assert dist.improving_mass(SUBSTITUTE) == Fraction(1, 12)
    assert dist.improving_mass(INSERT) == Fraction(2, 36)
    assert dist.improving_mass(DELETE) == Fraction(1, 6)
    # 2 leaves x 2 terminals, 3 nodes x 2 terminals x 2 sides, 2 leaves
    assert (dist.count(SUBSTITUTE), dist.count(INSERT), dist.count(DELETE)) == (4, 12, 2)


def test_optimal_tree_has_no_improving_mass():
    assert enumerate_single_mutations(parse_tree("(J x1 x1)"), "order", 1).improving_mass() == 0


@pytest.mark.parametrize("text,n", [("x2", 3), ("(J (J x1 ~x2) x3)", 3), ("(J ~x1 (J x2 x2))", 2)])
def test_distribution_sums_to_one(text, n):
    for prob in ("order", "majority"):
        d = enumerate_single_mutations(parse_tree(text), prob, n)
        assert d.total() == 1
        assert all(isinstance(o.probability, Fraction) for o in d.outcomes)


def test_monte_carlo_agrees_small():
    tree = parse_tree("(J ~x1 x1)")
    draws = 60_000
    hits = monte_carlo_improving(tree, "order", 1, draws, random.Random(7))
    p = 11 / 36
    assert abs(hits - draws * p) <= 3 * (draws * p * (1 - p)) ** 0.5


def test_enumeration_guard():
    with pytest.raises(EnumerationTooLarge):
        enumerate_single_mutations(GpTree.vine([1] * 2000), "order", 1000)


def test_insert_bound_example():
    rep = check_insert_bound(parse_tree("(J ~x1 x1)"), 1)
    assert rep.k == 0 and rep.S == 3
    assert rep.exact == Fraction(1, 18)
    assert rep.bound == Fraction(1, 36) / E_LOWER
    assert abs(float(rep.bound) - 1 / (36 * e)) < 1e-12
    assert rep.applicable and rep.passed


def test_insert_bound_optimal_is_vacuous():
    rep = check_insert_bound(parse_tree("(J x1 x2)"), 2)
    assert rep.k == 2 and rep.bound == 0 and rep.exact == 0 and rep.passed


def test_insert_bound_rejects_wrong_k():
    with pytest.raises(ValueError):
        check_insert_bound(parse_tree("(J ~x1 x1)"), 1, k=1)


def test_insert_bound_rounded_up():
    assert insert_bound(3, 1, 11) > Fraction(6, 6 * 3 * 4 * 11) / Fraction(e)


def test_insert_bound_sweep_small():
    lines = list(run_insert_bound_check(count=40, seed=3))
    assert len(lines) == 40 and all(passed for _, _, passed, _ in lines)


def test_sdp_smallest():
    assert check_sdp(parse_tree("(J x1 ~x1)"), 1)


def test_sdp_single_leaf_differs():
    sub, comp = sdp_distributions(parse_tree("x1"), 1)
    assert sub != comp
    assert not check_sdp(parse_tree("x1"), 1)


def test_sdp_shape_sweep_agrees_with_vines():
    # MAJORITY ignores shape; check every shape anyway on a small range
    for T in range(2, 5):
        for t in all_trees(T, 2):
            assert check_sdp(t, 2)


def test_sdp_not_a_property_of_order():
    # under ORDER the two compound moves disagree on some trees
    def order_deltas(tree, n):  # n = 2 only
        f0 = order_value(tree.sequence, n)
        sub, comp = {}, {}
        T = tree.leaf_count
        for slot in range(T):
            for u in (1, 2, -1, -2):
                c = tree.copy()
                c.apply_move((SUBSTITUTE, slot, u, None))
                d = order_value(c.sequence, n) - f0
                sub[d] = sub.get(d, 0) + Fraction(1, T * 2 * n)
        for slot in range(T):
            mid = tree.copy()
            mid.apply_move((DELETE, slot, None, None))
            w = Fraction(1, T * mid.node_count * 4 * n)
            for v in range(mid.node_count):
                for u in (1, 2, -1, -2):
                    for left in (True, False):
                        c = mid.copy()
                        c.apply_move((INSERT, v, u, left))
                        d = order_value(c.sequence, n) - f0
                        comp[d] = comp.get(d, 0) + w
        return sub, comp

    pairs = (order_deltas(t, 2) for t in multiset_trees(3, 2, min_leaves=2))
    assert any(sub != comp for sub, comp in pairs)


def test_stuck_examples():
    assert crosscheck_stuck(init_t_lopt(3), 3).predicted is True
    assert crosscheck_stuck(init_t_lopt(3), 3).exhaustive is True
    r = crosscheck_stuck(parse_tree("(J ~x1 ~x1)"), 1)
    assert (r.predicted, r.exhaustive) == (False, False)
    r = crosscheck_stuck(parse_tree("(J x1 x2)"), 2)
    assert (r.predicted, r.exhaustive) == (False, False)


def test_stuck_shape_sweep():
    for T in range(1, 5):
        for t in all_trees(T, 2):
            assert crosscheck_stuck(t, 2).agrees
