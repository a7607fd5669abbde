"""Exhaustive, exact-probability checks of the mutation operator and the theory built on it.

All probabilities are ``fractions.Fraction``. The one transcendental constant
(e, in the improvement bound) enters as a rational lower bound on e, which
rounds the bound up.
"""
from __future__ import annotations

import itertools
import random
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Optional

from .initializers import random_tree
from .problems import DeficitProfile, ProblemKind, evaluate, is_stuck_gpstar_single_majority, order_value
from .tree import DELETE, INSERT, SUBSTITUTE, GpTree, MutationRecord, fill_shape, hvl_prime_step, iter_shapes, parse_tree

ENUMERATION_LIMIT = 10**6

# 2.71828182845 < e, so bounds computed with it are never below the true bound
E_LOWER = Fraction(271828182845, 10**11)


class EnumerationTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class Outcome:
    record: MutationRecord
    probability: Fraction
    fitness: int


@dataclass
class MutationDistribution:
    """Every single HVL-Mutate' outcome of one tree with its exact probability."""

    base_fitness: int
    outcomes: list[Outcome]

    def total(self) -> Fraction:
        return sum((o.probability for o in self.outcomes), Fraction(0))

    def mass(self, pred: Callable[[Outcome], bool]) -> Fraction:
        return sum((o.probability for o in self.outcomes if pred(o)), Fraction(0))

    def improving_mass(self, op: Optional[str] = None) -> Fraction:
        f0 = self.base_fitness
        return self.mass(lambda o: o.fitness > f0 and (op is None or o.record.op == op))

    def count(self, op: str) -> int:
        return sum(1 for o in self.outcomes if o.record.op == op)


def _terminals(n: int) -> list[int]:
    return list(range(1, n + 1)) + [-i for i in range(1, n + 1)]


def _guard(tree: GpTree, n: int) -> None:
    if tree.node_count * n > ENUMERATION_LIMIT:
        raise EnumerationTooLarge(f"S*n = {tree.node_count * n} exceeds {ENUMERATION_LIMIT}")


def enumerate_single_mutations(tree: GpTree, problem, n: int) -> MutationDistribution:
    """All (op, position, terminal, side) outcomes of one mutation step.

    Substitute and delete pick a leaf uniformly, insert picks a node
    uniformly and a side with probability 1/2; each op has probability 1/3.
    """
    problem = ProblemKind.parse(problem)
    _guard(tree, n)
    T, S = tree.leaf_count, tree.node_count
    third = Fraction(1, 3)
    terms = _terminals(n)
    outcomes = []

    def add(move, p):
        child = tree.copy()
        rec = child.apply_move(move)
        outcomes.append(Outcome(rec, p, evaluate(problem, child.sequence, n)))

    p_sub = third / (T * 2 * n)
    for slot in range(T):
        for u in terms:
            add((SUBSTITUTE, slot, u, None), p_sub)
    p_ins = third / (S * 2 * n * 2)
    for v in range(S):
        for u in terms:
            for left in (True, False):
                add((INSERT, v, u, left), p_ins)
    p_del = third / T
    for slot in range(T):
        add((DELETE, slot, None, None), p_del)
    return MutationDistribution(evaluate(problem, tree.sequence, n), outcomes)


@dataclass(frozen=True)
class BoundReport:
    exact: Fraction      # improving mass from insertions alone
    bound: Fraction      # (1/(6en)) (n-k)(n-k+1) / (4S), e rounded down
    applicable: bool     # the bound is only claimed when T >= n - k
    k: int
    n: int
    S: int

    @property
    def passed(self) -> bool:
        return not self.applicable or self.exact >= self.bound

    def details(self) -> str:
        return (
            f"k={self.k} S={self.S} exact={self.exact} ({float(self.exact):.6g}) "
            f"bound={float(self.bound):.6g} applicable={self.applicable}"
        )


def insert_bound(n: int, k: int, S: int) -> Fraction:
    return Fraction((n - k) * (n - k + 1), 6 * n * 4 * S) / E_LOWER


def check_insert_bound(tree: GpTree, n: int, k: Optional[int] = None) -> BoundReport:
    """Compare the exact insertion-improvement probability on ORDER with the explicit bound."""
    actual = order_value(tree.sequence, n)
    if k is None:
        k = actual
    elif k != actual:
        raise ValueError(f"k={k} but the tree's ORDER fitness is {actual}")
    dist = enumerate_single_mutations(tree, ProblemKind.ORDER, n)
    exact = dist.improving_mass(INSERT)
    S = tree.node_count
    return BoundReport(exact, insert_bound(n, k, S), tree.leaf_count >= n - k, k, n, S)


def _delta_distribution_substitute(tree: GpTree, n: int) -> dict[int, Fraction]:
    f0 = evaluate(ProblemKind.MAJORITY, tree.sequence, n)
    T = tree.leaf_count
    out: dict[int, Fraction] = defaultdict(Fraction)
    w = Fraction(1, T * 2 * n)
    for slot in range(T):
        for u in _terminals(n):
            child = tree.copy()
            child.apply_move((SUBSTITUTE, slot, u, None))
            out[evaluate(ProblemKind.MAJORITY, child.sequence, n) - f0] += w
    return dict(out)


def _delta_distribution_delete_insert(tree: GpTree, n: int) -> dict[int, Fraction]:
    f0 = evaluate(ProblemKind.MAJORITY, tree.sequence, n)
    T = tree.leaf_count
    out: dict[int, Fraction] = defaultdict(Fraction)
    for slot in range(T):
        mid = tree.copy()
        mid.apply_move((DELETE, slot, None, None))
        S = mid.node_count
        w = Fraction(1, T * S * 2 * n * 2)
        for v in range(S):
            for u in _terminals(n):
                for left in (True, False):
                    child = mid.copy()
                    child.apply_move((INSERT, v, u, left))
                    out[evaluate(ProblemKind.MAJORITY, child.sequence, n) - f0] += w
    return dict(out)


def sdp_distributions(tree: GpTree, n: int) -> tuple[dict[int, Fraction], dict[int, Fraction]]:
    _guard(tree, n)
    return _delta_distribution_substitute(tree, n), _delta_distribution_delete_insert(tree, n)


def check_sdp(tree: GpTree, n: int) -> bool:
    """Is substitution distributed like delete-then-insert, in MAJORITY fitness change?

    Holds for every tree with at least two leaves. On a single leaf the
    deletion is vacuous, so the compound move only inserts and the two
    distributions differ.
    """
    sub, comp = sdp_distributions(tree, n)
    return sub == comp


@dataclass(frozen=True)
class StuckCheck:
    predicted: bool   # deficit characterization
    exhaustive: bool  # no single outcome improves, and not optimal

    @property
    def agrees(self) -> bool:
        return self.predicted == self.exhaustive


def crosscheck_stuck(tree: GpTree, n: int) -> StuckCheck:
    profile = DeficitProfile.from_leaves(tree.sequence, n)
    dist = enumerate_single_mutations(tree, ProblemKind.MAJORITY, n)
    trapped = dist.base_fitness < n and dist.improving_mass() == 0
    return StuckCheck(is_stuck_gpstar_single_majority(profile, n), trapped)


def monte_carlo_improving(tree: GpTree, problem, n: int, draws: int, rng) -> int:
    """Count single HVL-Mutate' draws (on fresh copies) that improve fitness."""
    problem = ProblemKind.parse(problem)
    f0 = evaluate(problem, tree.sequence, n)
    hits = 0
    if problem is ProblemKind.ORDER:
        for _ in range(draws):
            child = tree.copy()
            hvl_prime_step(child, rng, n)
            if order_value(child.sequence, n) > f0:
                hits += 1
    else:
        for _ in range(draws):
            child = tree.copy()
            hvl_prime_step(child, rng, n)
            if DeficitProfile.from_leaves(child.sequence, n).fitness > f0:
                hits += 1
    return hits


# -- instance families ----------------------------------------------------

def leaf_multisets(leaf_count: int, n: int) -> Iterator[tuple[int, ...]]:
    return itertools.combinations_with_replacement(_terminals(n), leaf_count)


def multiset_trees(max_leaves: int, n: int, min_leaves: int = 1) -> Iterator[GpTree]:
    """One vine per leaf multiset. Exhaustive for order-insensitive fitness."""
    for T in range(min_leaves, max_leaves + 1):
        for ms in leaf_multisets(T, n):
            yield GpTree.vine(ms)


def all_trees(leaf_count: int, n: int) -> Iterator[GpTree]:
    """Every shape with every leaf sequence."""
    terms = _terminals(n)
    shapes = list(iter_shapes(leaf_count))
    for seq in itertools.product(terms, repeat=leaf_count):
        for shape in shapes:
            yield GpTree.from_nested(fill_shape(shape, seq))


def insert_bound_instances(count: int, max_n: int, seed: int) -> Iterator[tuple[GpTree, int]]:
    rng = random.Random(seed)
    for _ in range(count):
        n = rng.randint(1, max_n)
        T = rng.randint(n, 4 * n)
        yield random_tree(T, n, rng), n


# -- report line protocol -------------------------------------------------

def report_line(check: str, instance: str, passed: bool, details: str) -> str:
    return f"{check}\t{instance}\t{'pass' if passed else 'fail'}\t{details}"


def _z(hits: int, draws: int, p: Fraction) -> float:
    pf = float(p)
    if pf in (0.0, 1.0):
        return 0.0 if hits == round(pf * draws) else float("inf")
    return (hits - draws * pf) / (draws * pf * (1 - pf)) ** 0.5


def run_operator_check(text: str = "(J ~x1 x1)", n: int = 1, problem="order",
                       draws: int = 100_000, seed: int = 0) -> Iterator[tuple]:
    tree = parse_tree(text, n)
    dist = enumerate_single_mutations(tree, problem, n)
    exact = dist.improving_mass()
    ok_total = dist.total() == 1
    hits = monte_carlo_improving(tree, problem, n, draws, random.Random(seed))
    z = _z(hits, draws, exact)
    yield (
        "operator", f"{text} n={n} {problem}", ok_total and abs(z) <= 3.0,
        f"improving={exact} mc={hits}/{draws} z={z:.3f} total={dist.total()}",
    )


def run_insert_bound_check(text: Optional[str] = None, n: Optional[int] = None,
                     count: int = 200, max_n: int = 6, seed: int = 0) -> Iterator[tuple]:
    if text is not None:
        cases = [(parse_tree(text, n), n)]
    else:
        cases = insert_bound_instances(count, max_n, seed)
    for tree, m in cases:
        rep = check_insert_bound(tree, m)
        yield "insert-bound", f"{tree} n={m}", rep.passed, rep.details()


def run_sdp_check(text: Optional[str] = None, n: Optional[int] = None,
                  max_leaves: int = 6, max_n: int = 3) -> Iterator[tuple]:
    if text is not None:
        tree = parse_tree(text, n)
        yield "sdp", f"{tree} n={n}", check_sdp(tree, n), f"T={tree.leaf_count}"
        return
    for m in range(1, max_n + 1):
        for tree in multiset_trees(max_leaves, m, min_leaves=2):
            yield "sdp", f"{tree} n={m}", check_sdp(tree, m), f"T={tree.leaf_count}"


def run_stuck_check(text: Optional[str] = None, n: Optional[int] = None,
                    max_leaves: int = 8, max_n: int = 3) -> Iterator[tuple]:
    if text is not None:
        trees = [(parse_tree(text, n), n)]
    else:
        trees = ((t, m) for m in range(1, max_n + 1) for t in multiset_trees(max_leaves, m))
    for tree, m in trees:
        res = crosscheck_stuck(tree, m)
        yield (
            "stuck", f"{tree} n={m}", res.agrees,
            f"predicted={res.predicted} exhaustive={res.exhaustive}",
        )


CHECKS = {
    "operator": run_operator_check,
    "insert-bound": run_insert_bound_check,
    "sdp": run_sdp_check,
    "stuck": run_stuck_check,
}
