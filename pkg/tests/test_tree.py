import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hvlgp.initializers import random_tree
from hvlgp.tree import (
    DELETE, INSERT, SUBSTITUTE, GpTree, StaleHandleError, Terminal, TreeParseError,
    draw_move, hvl_prime_step, inorder_leaves, parse_tree, serialize,
)

# chi-square 0.999 quantiles, so a correct sampler fails about once per thousand seeds
CHI2_999 = {1: 10.83, 2: 13.82, 5: 20.52}


def chi2(counts, expected):
    return sum((c - e) ** 2 / e for c, e in zip(counts, expected))


@st.composite
def trees(draw, max_leaves=12, max_n=4):
    n = draw(st.integers(1, max_n))
    T = draw(st.integers(1, max_leaves))
    seed = draw(st.integers(0, 2**32))
    return random_tree(T, n, random.Random(seed)), n


# -- parse / serialize --------------------------------------------------

@pytest.mark.parametrize("text,n,T,S,leaves", [
    ("(J x1 ~x4)", 4, 2, 3, [1, -4]),
    ("x3", 3, 1, 1, [3]),
    ("(J (J x1 ~x4) (J x2 ~x1))", 4, 4, 7, [1, -4, 2, -1]),
    ("(J (J x1 ~x4) x2)", None, 3, 5, [1, -4, 2]),
])
def test_parse_examples(text, n, T, S, leaves):
    t = parse_tree(text, n)
    assert (t.leaf_count, t.node_count, t.sequence) == (T, S, leaves)
    assert serialize(t) == text
    t.audit()


def test_worked_order_leaf_list_through_a_tree():
    t = parse_tree("(J (J x1 (J ~x4 x2)) (J ~x1 (J x3 ~x6)))", 6)
    assert [str(x) for x in inorder_leaves(t)] == ["x1", "~x4", "x2", "~x1", "x3", "~x6"]


def test_serialize_small():
    assert serialize(GpTree.leaf(-2)) == "~x2"
    assert serialize(GpTree.from_nested((1, 1))) == "(J x1 x1)"


@pytest.mark.parametrize("bad", [
    "", "x0", "x", "(J x1)", "(J x1 x2 x3)", "(J x1 x2", "(J  x1 x2)", "(K x1 x2)",
    "x1 ", " x1", "(J x1 x2))", "~~x1", "x01",
])
def test_parse_rejects(bad):
    with pytest.raises(TreeParseError):
        parse_tree(bad)


def test_parse_checks_n():
    with pytest.raises(TreeParseError):
        parse_tree("(J x1 x5)", 4)


@settings(max_examples=200, deadline=None)
@given(trees())
def test_roundtrip(tn):
    t, n = tn
    back = parse_tree(serialize(t), n)
    assert back == t
    assert back.to_nested() == t.to_nested()


def test_terminal():
    t = Terminal.parse("~x3")
    assert (t.index, t.negated, str(t), int(t)) == (3, True, "~x3", -3)
    assert t.complement() == Terminal(3)
    with pytest.raises(ValueError):
        Terminal(0)


# -- sub-operations -----------------------------------------------------

def test_substitute_example():
    t = parse_tree("(J x1 ~x1)")
    rec = t.substitute(t.leaf_at(1), Terminal(1))
    assert str(t) == "(J x1 x1)"
    assert (rec.op, rec.removed, rec.added) == (SUBSTITUTE, -1, 1)


def test_substitute_same_terminal_is_noop():
    t = parse_tree("(J x1 ~x2)")
    t.substitute(t.leaf_at(0), 1)
    assert str(t) == "(J x1 ~x2)"


def test_insert_at_root_of_leaf():
    t = parse_tree("x1")
    t.insert(t.root_ref(), -1, "left")
    assert str(t) == "(J ~x1 x1)"


def test_insert_above_leaf_shifts_traversal():
    t = parse_tree("(J ~x1 x1)")
    t.insert(t.leaf_at(0), 1, "left")
    assert t.sequence == [1, -1, 1]
    assert str(t) == "(J (J x1 ~x1) x1)"
    t.audit()


def test_delete_examples():
    t = parse_tree("(J ~x1 x1)")
    t.delete(t.leaf_at(0))
    assert str(t) == "x1"
    t = parse_tree("(J (J x1 x2) x3)")
    t.delete(t.leaf_at(1))
    assert str(t) == "(J x1 x3)"
    t.audit()


def test_delete_only_leaf_is_vacuous():
    t = parse_tree("x1")
    rec = t.delete(t.leaf_at(0))
    assert rec.vacuous and str(t) == "x1"


def test_stale_handles():
    t = parse_tree("(J x1 x2)")
    ref = t.leaf_at(0)
    t.substitute(t.leaf_at(1), 3)
    with pytest.raises(StaleHandleError):
        t.delete(ref)
    other = parse_tree("(J x1 x2)")
    with pytest.raises(StaleHandleError):
        other.delete(t.leaf_at(0))


def test_size_changes_over_random_applications():
    rng = random.Random(5)
    t = random_tree(6, 3, rng)
    for _ in range(1000):
        T, S = t.leaf_count, t.node_count
        rec = hvl_prime_step(t, rng, 3)
        if rec.op == INSERT:
            assert (t.leaf_count, t.node_count) == (T + 1, S + 2)
        elif rec.op == DELETE and not rec.vacuous:
            assert (t.leaf_count, t.node_count) == (T - 1, S - 2)
        else:
            assert (t.leaf_count, t.node_count) == (T, S)
    t.audit()


@settings(max_examples=150, deadline=None)
@given(trees(), st.integers(0, 2**32), st.integers(1, 40))
def test_audit_after_random_mutations(tn, seed, steps):
    t, n = tn
    rng = random.Random(seed)
    for _ in range(steps):
        hvl_prime_step(t, rng, n)
        assert t.node_count == 2 * t.leaf_count - 1
    t.audit()
    assert parse_tree(str(t)) == t


@settings(max_examples=100, deadline=None)
@given(trees(), st.data())
def test_insert_then_delete_restores(tn, data):
    t, n = tn
    before = str(t)
    v = data.draw(st.integers(0, t.node_count - 1))
    u = data.draw(st.sampled_from([1, -1]))
    left = data.draw(st.booleans())
    rec = t.apply_move((INSERT, v, u, left))
    # rec names v; the new leaf lands just before or just after v's leaves
    r = rec.rank if left else rec.rank + rec.span
    assert t.sequence[r] == u
    t.delete(t.leaf_at(r))
    assert str(t) == before


@settings(max_examples=100, deadline=None)
@given(trees(), st.integers(0, 2**32), st.integers(1, 20))
def test_replay_reproduces(tn, seed, steps):
    t, n = tn
    twin = t.copy()
    rng = random.Random(seed)
    for _ in range(steps):
        rec = hvl_prime_step(t, rng, n)
        twin.replay(rec)
        assert twin == t


def test_copy_is_independent():
    t = parse_tree("(J x1 x2)")
    c = t.copy()
    c.apply_move((INSERT, 0, 3, True))
    assert str(t) == "(J x1 x2)"
    assert t.leaf_count == 2 and c.leaf_count == 3


# -- sampling uniformity ------------------------------------------------

def test_sample_leaf_single():
    t = parse_tree("x4")
    rng = random.Random(0)
    assert all(t.sample_leaf(rng) == t.leaf_at(0) for _ in range(20))


def test_sample_node_uniform():
    t = parse_tree("(J x1 x2)")
    rng = random.Random(11)
    draws = 300_000
    c = Counter(t.sample_node(rng).node for _ in range(draws))
    assert chi2([c[i] for i in range(3)], [draws / 3] * 3) < CHI2_999[2]


def test_sample_leaf_binomial():
    t = parse_tree("(J x1 x2)")
    rng = random.Random(12)
    draws = 100_000
    hits = sum(t.terminal_at(t.sample_leaf(rng)) == 1 for _ in range(draws))
    sigma = (draws * 0.25) ** 0.5
    assert abs(hits - draws / 2) <= 3 * sigma


def test_op_frequencies_uniform():
    rng = random.Random(13)
    draws = 100_000
    c = Counter(draw_move(rng, 4, 2)[0] for _ in range(draws))
    assert chi2([c[SUBSTITUTE], c[INSERT], c[DELETE]], [draws / 3] * 3) < CHI2_999[2]


def test_terminal_draws_uniform():
    rng = random.Random(14)
    draws = 60_000
    c = Counter(draw_move(rng, 1, 3)[2] for _ in range(draws))
    subs_ins = sum(v for k, v in c.items() if k is not None)
    codes = [1, 2, 3, -1, -2, -3]
    assert set(c) - {None} == set(codes)
    assert chi2([c[k] for k in codes], [subs_ins / 6] * 6) < CHI2_999[5]
