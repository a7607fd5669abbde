"""The (1+1) GP / GP* loop with single or Poisson-multi HVL-Mutate' proposals.

Every offspring evaluation counts, including rejected and vacuous ones; the
initial solution is evaluation 1.

``run`` picks one of three proposal paths, all sampling the same process:

* reference: copy the parent, mutate the copy k times, evaluate, accept.
  Used for ORDER, for full traces, and whenever ``RunConfig.reference``.
* MAJORITY, non-strict: proposals are simulated on a bag of leaf codes that
  consumes exactly the reference path's random draws, and the tree is only
  edited when a proposal is accepted. Results are bit-identical to the
  reference path.
* MAJORITY, strict: while no move is accepted the parent never changes, so
  proposals are i.i.d. and are drawn in numpy batches over the terminal
  counts. The first improving proposal is materialized on the tree with
  conditionally uniform leaf/position choices. Same distribution as the
  reference path, different random stream.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np

from .initializers import make_initial
from .problems import DeficitProfile, ProblemKind, is_stuck_gpstar_single_majority, order_value
from .tree import DELETE, INSERT, SUBSTITUTE, GpTree, _below, draw_move, hvl_prime_step

_EXP_M1 = math.exp(-1.0)


class Acceptance(str, Enum):
    NONSTRICT = "nonstrict"  # (1+1) GP: f' >= f
    STRICT = "strict"        # (1+1) GP*: f' > f


class OpCount(str, Enum):
    SINGLE = "single"
    MULTI = "multi"


class Status(str, Enum):
    OPTIMAL = "optimal"
    STUCK = "stuck"
    BUDGET_EXHAUSTED = "budget-exhausted"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    problem: ProblemKind
    n: int
    acceptance: Acceptance = Acceptance.NONSTRICT
    ops: OpCount = OpCount.SINGLE
    init: str = "unity"
    seed: int = 0
    budget: int = 0               # max evaluations, 0 = unlimited
    stuck_detection: bool = True  # only meaningful for strict/single/MAJORITY
    trace_level: int = 0          # 0 none, 1 accepted moves, 2 every proposal
    reference: bool = False

    def __post_init__(self):
        object.__setattr__(self, "problem", ProblemKind.parse(self.problem))
        object.__setattr__(self, "acceptance", Acceptance(str(getattr(self.acceptance, "value", self.acceptance)).lower()))
        object.__setattr__(self, "ops", OpCount(str(getattr(self.ops, "value", self.ops)).lower()))

    @property
    def detects_stuck(self) -> bool:
        return (
            self.stuck_detection
            and self.problem is ProblemKind.MAJORITY
            and self.acceptance is Acceptance.STRICT
            and self.ops is OpCount.SINGLE
        )

    def validate(self) -> None:
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if self.budget < 0:
            raise ConfigError("budget must be >= 0")
        if self.trace_level not in (0, 1, 2):
            raise ConfigError("trace_level must be 0, 1 or 2")
        if self.budget == 0 and not self.terminates:
            raise ConfigError(
                f"unlimited budget for {self.problem.value}/{self.acceptance.value}/{self.ops.value} "
                "has no termination guarantee; set a budget"
            )

    @property
    def terminates(self) -> bool:
        """Whether the run is known to end with probability one without a budget."""
        if self.problem is ProblemKind.ORDER:
            return True
        if self.ops is OpCount.SINGLE:
            return self.acceptance is Acceptance.NONSTRICT or self.detects_stuck
        return False


@dataclass
class RunResult:
    status: Status
    evaluations: int
    t_max: int            # largest node count of the current solution
    initial_nodes: int
    final_fitness: int
    accepted: int
    n: int
    final_tree: Optional[GpTree] = field(default=None, repr=False)
    detail: str = ""
    trace: list[str] = field(default_factory=list, repr=False)

    def summary_lines(self) -> list[str]:
        return [
            f"status = {self.status.value}",
            f"evaluations = {self.evaluations}",
            f"accepted = {self.accepted}",
            f"final_fitness = {self.final_fitness}",
            f"n = {self.n}",
            f"initial_nodes = {self.initial_nodes}",
            f"t_max_nodes = {self.t_max}",
        ] + ([f"detail = {self.detail}"] if self.detail else [])


def sample_op_count(policy: OpCount, rng) -> int:
    """1 for single; 1 + Poisson(1) by Knuth's product of uniforms for multi."""
    if policy is OpCount.SINGLE:
        return 1
    k = 0
    p = rng.random()
    while p > _EXP_M1:
        k += 1
        p *= rng.random()
    return 1 + k


def accept(policy: Acceptance, f_old: int, f_new: int) -> bool:
    if policy is Acceptance.STRICT:
        return f_new > f_old
    return f_new >= f_old


def _majority_counts(tree: GpTree, n: int) -> tuple[list[int], list[int]]:
    prof = DeficitProfile.from_leaves(tree.sequence, n)
    return list(prof.pos), list(prof.neg)


def _trace_line(evals: int, records, f_old: int, f_new: int, ok: bool) -> str:
    ops = ";".join(r.describe() for r in records)
    return f"{evals}\t{ops}\t{f_old}\t{f_new}\t{int(ok)}"


class _Run:
    """Mutable bookkeeping shared by the proposal paths."""

    def __init__(self, config: RunConfig, tree: GpTree, fitness: int):
        self.config = config
        self.tree = tree
        self.f = fitness
        self.evals = 1
        self.accepted = 0
        self.initial_nodes = tree.node_count
        self.t_max = tree.node_count
        self.trace: list[str] = []

    def result(self, status: Status, detail: str = "") -> RunResult:
        return RunResult(
            status, self.evals, self.t_max, self.initial_nodes, self.f,
            self.accepted, self.config.n, self.tree, detail, self.trace,
        )

    def budget_left(self) -> Optional[int]:
        b = self.config.budget
        return None if b == 0 else b - self.evals

    def stuck(self, pos, neg) -> bool:
        if not self.config.detects_stuck:
            return False
        return is_stuck_gpstar_single_majority(DeficitProfile(tuple(pos), tuple(neg)), self.config.n)

    def finished(self, pos=None, neg=None) -> Optional[RunResult]:
        if self.f == self.config.n:
            return self.result(Status.OPTIMAL)
        if pos is not None and self.stuck(pos, neg):
            d = [b - a for a, b in zip(pos, neg) if not (a >= 1 and a >= b)]
            return self.result(Status.STUCK, "unexpressed deficits " + ",".join(map(str, d)))
        left = self.budget_left()
        if left is not None and left <= 0:
            return self.result(Status.BUDGET_EXHAUSTED)
        return None

    def took(self, tree: GpTree, f_new: int) -> None:
        self.tree = tree
        self.f = f_new
        self.accepted += 1
        if tree.node_count > self.t_max:
            self.t_max = tree.node_count


def run(config: RunConfig) -> RunResult:
    """Run one hill climber to optimum, certified stuck state, or budget."""
    config.validate()
    rng = random.Random(config.seed)
    tree = make_initial(config.init, config.n, rng)
    if config.problem is ProblemKind.ORDER or config.reference or config.trace_level == 2:
        return _run_reference(config, tree, rng)
    if config.acceptance is Acceptance.STRICT:
        return _run_majority_batched(config, tree, rng)
    return _run_majority_shadow(config, tree, rng)


def _evaluate(problem: ProblemKind, tree: GpTree, n: int) -> int:
    if problem is ProblemKind.ORDER:
        return order_value(tree.sequence, n)
    return DeficitProfile.from_leaves(tree.sequence, n).fitness


def _run_reference(config: RunConfig, tree: GpTree, rng) -> RunResult:
    n, problem = config.n, config.problem
    st = _Run(config, tree, _evaluate(problem, tree, n))
    counts = (lambda t: _majority_counts(t, n)) if config.detects_stuck else (lambda t: (None, None))
    done = st.finished(*counts(tree))
    trace_all = config.trace_level == 2
    while done is None:
        k = sample_op_count(config.ops, rng)
        child = st.tree.copy()
        records = [hvl_prime_step(child, rng, n) for _ in range(k)]
        st.evals += 1
        f_new = _evaluate(problem, child, n)
        ok = accept(config.acceptance, st.f, f_new)
        if trace_all or (ok and config.trace_level):
            st.trace.append(_trace_line(st.evals, records, st.f, f_new, ok))
        if ok:
            st.took(child, f_new)
            done = st.finished(*counts(child))
        else:
            left = st.budget_left()
            if left is not None and left <= 0:
                done = st.result(Status.BUDGET_EXHAUSTED)
    return done


def _express_delta(pos, neg, changes) -> tuple[int, dict]:
    """Fitness change from (code, +1/-1) count changes; also the new counts touched."""
    touched: dict[int, list[int]] = {}
    for code, d in changes:
        if code > 0:
            i = code - 1
            c = touched.get(i) or touched.setdefault(i, [pos[i], neg[i]])
            c[0] += d
        else:
            i = -code - 1
            c = touched.get(i) or touched.setdefault(i, [pos[i], neg[i]])
            c[1] += d
    delta = 0
    for i, (a, b) in touched.items():
        delta += (a >= 1 and a >= b) - (pos[i] >= 1 and pos[i] >= neg[i])
    return delta, touched


def _run_majority_shadow(config: RunConfig, tree: GpTree, rng) -> RunResult:
    n = config.n
    pos, neg = _majority_counts(tree, n)
    st = _Run(config, tree, DeficitProfile(tuple(pos), tuple(neg)).fitness)
    done = st.finished(pos, neg)
    multi = config.ops is OpCount.MULTI
    acc = config.acceptance
    while done is None:
        k = sample_op_count(config.ops, rng) if multi else 1
        bag = st.tree.leaf_terms
        if k > 1:
            bag = bag.copy()
        moves = []
        changes = []
        for _ in range(k):
            move = draw_move(rng, len(bag), n)
            op, p, u, _left = move
            if op == SUBSTITUTE:
                changes.append((bag[p], -1))
                changes.append((u, 1))
                if k > 1:
                    bag[p] = u
            elif op == INSERT:
                changes.append((u, 1))
                if k > 1:
                    bag.append(u)
            elif len(bag) > 1:
                changes.append((bag[p], -1))
                if k > 1:
                    bag[p] = bag[-1]
                    bag.pop()
            moves.append(move)
        st.evals += 1
        delta, touched = _express_delta(pos, neg, changes)
        f_new = st.f + delta
        if accept(acc, st.f, f_new):
            records = [st.tree.apply_move(m) for m in moves]
            for i, (a, b) in touched.items():
                pos[i], neg[i] = a, b
            if config.trace_level:
                st.trace.append(_trace_line(st.evals, records, st.f, f_new, True))
            st.took(st.tree, f_new)
            done = st.finished(pos, neg)
        else:
            left = st.budget_left()
            if left is not None and left <= 0:
                done = st.result(Status.BUDGET_EXHAUSTED)
    return done


_BATCH_MIN = 64
_BATCH_MAX = 1 << 15


def poisson1_knuth(gen: np.random.Generator, size: int) -> np.ndarray:
    """Vectorized Knuth sampler for Poisson(1): count leading partial products above 1/e."""
    cap = 24
    cp = np.cumprod(gen.random((size, cap)), axis=1)
    k = (cp > _EXP_M1).sum(axis=1)
    tail = np.flatnonzero(k == cap)
    for i in tail:  # probability ~1e-24 per draw
        p = cp[i, -1]
        while p > _EXP_M1:
            p *= gen.random()
            k[i] += 1
    return k


def propose_batch(gen: np.random.Generator, counts: np.ndarray, leaf_count: int, n: int,
                  size: int, multi: bool):
    """Draw ``size`` independent proposals from one parent, tracked by terminal counts.

    ``counts`` has 2n columns: column j < n is x_{j+1}, column n + j is ~x_{j+1}.
    Returns ``(k, ops, removed, added, fitness)``; ``ops`` uses 0/1/2 for
    substitute/insert/delete, ``removed``/``added`` hold column ids or -1.
    """
    k = poisson1_knuth(gen, size) + 1 if multi else np.ones(size, dtype=np.int64)
    kmax = int(k.max())
    C = np.tile(counts.astype(np.int32), (size, 1))
    Tb = np.full(size, leaf_count, dtype=np.int64)
    ops = np.full((size, kmax), -1, dtype=np.int8)
    removed = np.full((size, kmax), -1, dtype=np.int32)
    added = np.full((size, kmax), -1, dtype=np.int32)
    for s in range(kmax):
        rows = np.arange(size) if s == 0 else np.flatnonzero(k > s)
        op = gen.integers(0, 3, rows.size)
        ops[rows, s] = op
        Tr = Tb[rows]
        shrink = (op == 2) & (Tr > 1)
        rr = rows[(op == 0) | shrink]
        if rr.size:
            r = (gen.random(rr.size) * Tb[rr]).astype(np.int64)
            col = np.argmax(np.cumsum(C[rr], axis=1) > r[:, None], axis=1)
            C[rr, col] -= 1
            removed[rr, s] = col
        ad = rows[op <= 1]
        if ad.size:
            col = gen.integers(0, 2 * n, ad.size)
            C[ad, col] += 1
            added[ad, s] = col
        Tb[rows[op == 1]] += 1
        Tb[rows[shrink]] -= 1
    P, N = C[:, :n], C[:, n:]
    fitness = ((P >= 1) & (P >= N)).sum(axis=1)
    return k, ops, removed, added, fitness


def _col_code(col: int, n: int) -> int:
    return col + 1 if col < n else n - col - 1


def _materialize(tree: GpTree, rng, ops, removed, added, k: int, n: int) -> list:
    """Apply one batch proposal to the tree, choosing concrete leaves and positions uniformly."""
    records = []
    for s in range(k):
        op = int(ops[s])
        if op == 1:
            v = _below(rng, tree.node_count)
            left = rng.random() < 0.5
            records.append(tree.apply_move((INSERT, v, _col_code(int(added[s]), n), left)))
            continue
        if op == 2 and removed[s] < 0:
            records.append(tree.apply_move((DELETE, 0, None, None)))
            continue
        code = _col_code(int(removed[s]), n)
        slots = [i for i, c in enumerate(tree.leaf_terms) if c == code]
        i = slots[_below(rng, len(slots))]
        if op == 0:
            records.append(tree.apply_move((SUBSTITUTE, i, _col_code(int(added[s]), n), None)))
        else:
            records.append(tree.apply_move((DELETE, i, None, None)))
    return records


def _run_majority_batched(config: RunConfig, tree: GpTree, rng) -> RunResult:
    n = config.n
    pos, neg = _majority_counts(tree, n)
    st = _Run(config, tree, DeficitProfile(tuple(pos), tuple(neg)).fitness)
    done = st.finished(pos, neg)
    gen = np.random.default_rng(config.seed)
    multi = config.ops is OpCount.MULTI
    batch = _BATCH_MIN
    while done is None:
        left = st.budget_left()
        size = batch if left is None else min(batch, left)
        k, ops, removed, added, fitness = propose_batch(
            gen, np.array(pos + neg), st.tree.leaf_count, n, size, multi
        )
        hits = np.flatnonzero(fitness > st.f)
        if hits.size == 0:
            st.evals += size
            batch = min(2 * batch, _BATCH_MAX)
            if left is not None and left - size <= 0:
                done = st.result(Status.BUDGET_EXHAUSTED)
            continue
        b = int(hits[0])
        st.evals += b + 1
        records = _materialize(st.tree, rng, ops[b], removed[b], added[b], int(k[b]), n)
        f_new = int(fitness[b])
        if config.trace_level:
            st.trace.append(_trace_line(st.evals, records, st.f, f_new, True))
        for r in records:
            for code, d in ((r.removed, -1), (r.added, 1)):
                if code > 0:
                    pos[code - 1] += d
                elif code < 0:
                    neg[-code - 1] += d
        st.took(st.tree, f_new)
        batch = _BATCH_MIN
        done = st.finished(pos, neg)
    return done


def config_with(config: RunConfig, **changes) -> RunConfig:
    return replace(config, **changes)
