"""Binary join/terminal parse trees and the HVL-Mutate' sub-operations.

Trees live in a dense arena: node ids are always ``0 .. S-1``. Deleting a
leaf and its parent releases their slots by moving the highest-numbered
nodes into them, so uniform node sampling is a single ``randrange(S)``.

The inorder leaf sequence and a leaf index (for O(1) uniform leaf
sampling) are maintained incrementally; structural edits cost O(depth).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence, Union

__all__ = [
    "Terminal",
    "GpTree",
    "NodeRef",
    "LeafRef",
    "MutationRecord",
    "TreeParseError",
    "StaleHandleError",
    "TreeInvariantError",
    "parse_tree",
    "serialize",
    "inorder_leaves",
    "hvl_prime_step",
    "random_terminal",
    "draw_move",
    "SUBSTITUTE",
    "INSERT",
    "DELETE",
]

SUBSTITUTE, INSERT, DELETE = "substitute", "insert", "delete"
_OPS = (SUBSTITUTE, INSERT, DELETE)


class TreeParseError(ValueError):
    pass


class StaleHandleError(RuntimeError):
    """A node handle was used after the tree it came from was mutated."""


class TreeInvariantError(AssertionError):
    pass


class Terminal(int):
    """A signed variable: the integer value ``+i`` is x_i and ``-i`` is ~x_i."""

    __slots__ = ()

    def __new__(cls, index: int, negated: bool = False) -> "Terminal":
        index = int(index)
        if index < 1:
            raise ValueError(f"terminal index must be >= 1, got {index}")
        return super().__new__(cls, -index if negated else index)

    @classmethod
    def from_code(cls, code: int) -> "Terminal":
        return cls(abs(code), code < 0)

    @classmethod
    def parse(cls, text: str) -> "Terminal":
        m = _LEAF_RE.fullmatch(text)
        if m is None:
            raise TreeParseError(f"not a terminal: {text!r}")
        return cls(int(m.group(2)), bool(m.group(1)))

    @property
    def index(self) -> int:
        return abs(int(self))

    @property
    def negated(self) -> bool:
        return int(self) < 0

    def complement(self) -> "Terminal":
        return Terminal(self.index, not self.negated)

    def __str__(self) -> str:
        return f"~x{-int(self)}" if self < 0 else f"x{int(self)}"

    def __repr__(self) -> str:
        return f"Terminal({str(self)!r})"


def term_str(code: int) -> str:
    return f"~x{-code}" if code < 0 else f"x{code}"


_LEAF_RE = re.compile(r"(~?)x([1-9][0-9]*)")


def _below(rng, m: int) -> int:
    # float-scaled index; bias is below 2**-53 * m, far under any test resolution
    return int(rng.random() * m)


def random_terminal(rng, n: int) -> int:
    """Uniform draw from the 2n terminals, as a signed code."""
    r = _below(rng, 2 * n)
    return r + 1 if r < n else n - r - 1


def draw_move(rng, leaf_count: int, n: int) -> tuple:
    """Draw one HVL-Mutate' proposal for a tree with ``leaf_count`` leaves.

    Returns ``(op, position, terminal, left)``. ``position`` is a slot in the
    leaf index for substitute/delete and a node id for insert. Only the tree
    size is consulted, so shadow simulations can reuse the exact same draws.
    """
    op = _below(rng, 3)
    if op == 0:
        return SUBSTITUTE, _below(rng, leaf_count), random_terminal(rng, n), None
    if op == 1:
        v = _below(rng, 2 * leaf_count - 1)
        u = random_terminal(rng, n)
        return INSERT, v, u, rng.random() < 0.5
    return DELETE, _below(rng, leaf_count), None, None


@dataclass(frozen=True)
class NodeRef:
    node: int
    owner: int
    version: int


@dataclass(frozen=True)
class LeafRef(NodeRef):
    pass


class MutationRecord(NamedTuple):
    """One applied sub-operation.

    The acted-on node is named canonically by ``(rank, span)``: the inorder
    rank of its first leaf and its number of leaves. No two nodes of a tree
    share both. ``removed``/``added`` are the terminal codes that left or
    entered the tree (0 for none).
    """

    op: str
    rank: int
    span: int
    removed: int = 0
    added: int = 0
    side: Optional[str] = None
    vacuous: bool = False

    def describe(self) -> str:
        parts = [self.op, f"@{self.rank}+{self.span}"]
        if self.removed:
            parts.append(f"-{term_str(self.removed)}")
        if self.added:
            parts.append(f"+{term_str(self.added)}")
        if self.side:
            parts.append(self.side)
        if self.vacuous:
            parts.append("vacuous")
        return ":".join(parts)


Nested = Union[int, tuple]


class GpTree:
    """Arena-backed binary tree of join nodes and signed-variable leaves."""

    __slots__ = (
        "_left", "_right", "_parent", "_term", "_size", "_slot",
        "_root", "_leaves", "_leaf_terms", "_seq", "_version",
    )

    def __init__(self) -> None:
        self._left: list[int] = []
        self._right: list[int] = []
        self._parent: list[int] = []
        self._term: list[int] = []   # 0 for a join, else signed terminal code
        self._size: list[int] = []   # leaves below (and including) the node
        self._slot: list[int] = []   # position in _leaves, -1 for joins
        self._root = -1
        self._leaves: list[int] = []
        self._leaf_terms: list[int] = []  # parallel to _leaves
        self._seq: list[int] = []    # inorder leaf codes
        self._version = 0

    # -- construction -----------------------------------------------------

    @classmethod
    def leaf(cls, code: int) -> "GpTree":
        return cls.from_nested(int(code))

    @classmethod
    def from_nested(cls, nested: Nested) -> "GpTree":
        """Build from a nested form: an int code is a leaf, a pair is a join."""
        t = cls()
        stack = [(nested, -1, False)]
        while stack:
            obj, parent, is_left = stack.pop()
            v = len(t._term)
            t._parent.append(parent)
            t._left.append(-1)
            t._right.append(-1)
            t._size.append(0)
            if parent == -1:
                t._root = v
            elif is_left:
                t._left[parent] = v
            else:
                t._right[parent] = v
            if isinstance(obj, tuple):
                if len(obj) != 2:
                    raise TreeParseError("join nodes need exactly two children")
                t._term.append(0)
                t._slot.append(-1)
                stack.append((obj[1], v, False))
                stack.append((obj[0], v, True))
            else:
                code = int(obj)
                if code == 0:
                    raise TreeParseError("terminal code 0 is not a variable")
                t._term.append(code)
                t._slot.append(len(t._leaves))
                t._size[v] = 1
                t._leaves.append(v)
                t._leaf_terms.append(code)
                t._seq.append(code)
        # ids were handed out in preorder, so children always follow parents
        size, parent = t._size, t._parent
        for v in range(len(size) - 1, 0, -1):
            size[parent[v]] += size[v]
        return t

    @classmethod
    def vine(cls, codes: Sequence[int]) -> "GpTree":
        """Left-leaning tree ``(J (J (J a b) c) d)`` with the given inorder leaves."""
        if not codes:
            raise ValueError("a tree needs at least one leaf")
        acc: Nested = int(codes[0])
        for c in codes[1:]:
            acc = (acc, int(c))
        return cls.from_nested(acc)

    def copy(self) -> "GpTree":
        t = GpTree.__new__(GpTree)
        t._left = self._left.copy()
        t._right = self._right.copy()
        t._parent = self._parent.copy()
        t._term = self._term.copy()
        t._size = self._size.copy()
        t._slot = self._slot.copy()
        t._root = self._root
        t._leaves = self._leaves.copy()
        t._leaf_terms = self._leaf_terms.copy()
        t._seq = self._seq.copy()
        t._version = 0
        return t

    # -- inspection -------------------------------------------------------

    @property
    def leaf_count(self) -> int:
        return len(self._leaves)

    @property
    def node_count(self) -> int:
        return len(self._term)

    @property
    def sequence(self) -> list[int]:
        """Inorder leaf codes. Live view; do not modify."""
        return self._seq

    @property
    def leaf_terms(self) -> list[int]:
        """Leaf codes in leaf-index order (the order ``sample_leaf`` draws from)."""
        return self._leaf_terms

    def inorder_leaves(self) -> list[Terminal]:
        return [Terminal.from_code(c) for c in self._seq]

    def to_nested(self) -> Nested:
        out: dict[int, Nested] = {}
        stack = [(self._root, False)]
        while stack:
            v, done = stack.pop()
            if self._term[v]:
                out[v] = self._term[v]
            elif done:
                out[v] = (out.pop(self._left[v]), out.pop(self._right[v]))
            else:
                stack += [(v, True), (self._right[v], False), (self._left[v], False)]
        return out[self._root]

    def serialize(self) -> str:
        parts: list[str] = []
        stack: list[Union[int, str]] = [self._root]
        while stack:
            item = stack.pop()
            if isinstance(item, str):
                parts.append(item)
                continue
            code = self._term[item]
            if code:
                parts.append(term_str(code))
            else:
                stack += [")", self._right[item], " ", self._left[item]]
                parts.append("(J ")
        return "".join(parts)

    __str__ = serialize

    def __repr__(self) -> str:
        return f"GpTree({self.serialize()!r})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GpTree):
            return NotImplemented
        return self._seq == other._seq and self.serialize() == other.serialize()

    __hash__ = None  # type: ignore[assignment]

    def depth(self) -> int:
        best = 0
        for v in self._leaves:
            d = 0
            while self._parent[v] != -1:
                v = self._parent[v]
                d += 1
            best = max(best, d)
        return best

    def rank(self, v: int) -> int:
        """Inorder rank of the first leaf under node ``v``."""
        left, right, parent, size = self._left, self._right, self._parent, self._size
        r = 0
        p = parent[v]
        while p != -1:
            if right[p] == v:
                r += size[left[p]]
            v = p
            p = parent[v]
        return r

    def locate(self, rank: int, span: int) -> int:
        """Node id for a canonical ``(rank, span)`` position."""
        v, base = self._root, 0
        while True:
            if base == rank and self._size[v] == span:
                return v
            if self._term[v] or not base <= rank < base + self._size[v]:
                raise KeyError(f"no node at rank={rank} span={span}")
            lsize = self._size[self._left[v]]
            if rank < base + lsize:
                v = self._left[v]
            else:
                base += lsize
                v = self._right[v]

    def audit(self) -> None:
        """Recount everything from scratch; raise TreeInvariantError on any mismatch."""
        S, T = self.node_count, self.leaf_count
        if T < 1 or S != 2 * T - 1:
            raise TreeInvariantError(f"S={S}, T={T}")
        if not 0 <= self._root < S or self._parent[self._root] != -1:
            raise TreeInvariantError("bad root")
        seen = 0
        seq: list[int] = []
        stack = [self._root]
        while stack:
            v = stack.pop()
            seen += 1
            if self._term[v]:
                if self._left[v] != -1 or self._right[v] != -1:
                    raise TreeInvariantError(f"leaf {v} has children")
                if self._size[v] != 1:
                    raise TreeInvariantError(f"leaf {v} size {self._size[v]}")
                slot = self._slot[v]
                if self._leaves[slot] != v or self._leaf_terms[slot] != self._term[v]:
                    raise TreeInvariantError(f"leaf index out of sync at {v}")
                seq.append(self._term[v])
                continue
            a, b = self._left[v], self._right[v]
            if a < 0 or b < 0:
                raise TreeInvariantError(f"join {v} lacks a child")
            if self._parent[a] != v or self._parent[b] != v:
                raise TreeInvariantError(f"parent links broken under {v}")
            if self._size[v] != self._size[a] + self._size[b]:
                raise TreeInvariantError(f"size wrong at {v}")
            if self._slot[v] != -1:
                raise TreeInvariantError(f"join {v} in leaf index")
            stack += [b, a]
        if seen != S:
            raise TreeInvariantError(f"{S - seen} unreachable nodes")
        if seq != self._seq:
            raise TreeInvariantError("inorder sequence out of sync")
        if len(self._leaf_terms) != T:
            raise TreeInvariantError("leaf term index length")

    # -- handles ----------------------------------------------------------

    def _ref(self, v: int, cls=NodeRef):
        return cls(v, id(self), self._version)

    def _check(self, ref: NodeRef) -> int:
        if ref.owner != id(self) or ref.version != self._version:
            raise StaleHandleError("handle does not belong to the current tree state")
        return ref.node

    def node_refs(self) -> list[NodeRef]:
        return [self._ref(v) for v in range(self.node_count)]

    def leaf_refs(self) -> list[LeafRef]:
        """Handles to all leaves, in inorder."""
        return [self.leaf_at(r) for r in range(self.leaf_count)]

    def root_ref(self) -> NodeRef:
        return self._ref(self._root)

    def leaf_at(self, rank: int) -> LeafRef:
        """Handle to the leaf at inorder position ``rank`` (0-based)."""
        return self._ref(self.locate(rank, 1), LeafRef)

    def node_at(self, rank: int, span: int) -> NodeRef:
        return self._ref(self.locate(rank, span))

    def terminal_at(self, ref: NodeRef) -> Optional[Terminal]:
        code = self._term[self._check(ref)]
        return Terminal.from_code(code) if code else None

    def sample_node(self, rng) -> NodeRef:
        return self._ref(_below(rng, self.node_count))

    def sample_leaf(self, rng) -> LeafRef:
        return self._ref(self._leaves[_below(rng, self.leaf_count)], LeafRef)

    # -- mutation (public, handle-checked) --------------------------------

    def substitute(self, leaf: LeafRef, u: int) -> MutationRecord:
        v = self._check(leaf)
        if not self._term[v]:
            raise ValueError("substitute needs a leaf")
        return self._substitute(v, int(u))

    def insert(self, v: NodeRef, u: int, side: str) -> MutationRecord:
        if side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {side!r}")
        return self._insert(self._check(v), int(u), side == "left")

    def delete(self, leaf: LeafRef) -> MutationRecord:
        v = self._check(leaf)
        if not self._term[v]:
            raise ValueError("delete needs a leaf")
        return self._delete(v)

    def apply_move(self, move: tuple) -> MutationRecord:
        """Apply a proposal as returned by :func:`draw_move`."""
        op, pos, u, left = move
        if op == SUBSTITUTE:
            return self._substitute(self._leaves[pos], u)
        if op == INSERT:
            return self._insert(pos, u, left)
        return self._delete(self._leaves[pos])

    def replay(self, record: MutationRecord) -> MutationRecord:
        """Re-apply a record (typically onto an equal copy of its source tree)."""
        if record.op == DELETE and record.vacuous:
            return self._delete(self._leaves[0])
        v = self.locate(record.rank, record.span)
        if record.op == SUBSTITUTE:
            return self._substitute(v, record.added)
        if record.op == INSERT:
            return self._insert(v, record.added, record.side == "left")
        return self._delete(v)

    # -- mutation (internal, by node id) ----------------------------------

    def _substitute(self, v: int, u: int) -> MutationRecord:
        old = self._term[v]
        r = self.rank(v)
        self._term[v] = u
        self._leaf_terms[self._slot[v]] = u
        self._seq[r] = u
        self._version += 1
        return MutationRecord(SUBSTITUTE, r, 1, old, u, vacuous=old == u)

    def _new_node(self, parent: int, code: int, size: int) -> int:
        v = len(self._term)
        self._left.append(-1)
        self._right.append(-1)
        self._parent.append(parent)
        self._term.append(code)
        self._size.append(size)
        if code:
            self._slot.append(len(self._leaves))
            self._leaves.append(v)
            self._leaf_terms.append(code)
        else:
            self._slot.append(-1)
        return v

    def _insert(self, v: int, u: int, left: bool) -> MutationRecord:
        parent, lft, rgt, size = self._parent, self._left, self._right, self._size
        span = size[v]
        p = parent[v]
        j = self._new_node(p, 0, span + 1)
        leaf = self._new_node(j, u, 1)
        if p == -1:
            self._root = j
        elif lft[p] == v:
            lft[p] = j
        else:
            rgt[p] = j
        parent[v] = j
        if left:
            lft[j], rgt[j] = leaf, v
        else:
            lft[j], rgt[j] = v, leaf
        # one upward walk: grow ancestor sizes and accumulate v's rank
        r = 0
        x = j
        while p != -1:
            size[p] += 1
            if rgt[p] == x:
                r += size[lft[p]]
            x = p
            p = parent[x]
        self._seq.insert(r if left else r + span, u)
        self._version += 1
        return MutationRecord(INSERT, r, span, 0, u, "left" if left else "right")

    def _delete(self, v: int) -> MutationRecord:
        if len(self._leaves) == 1:
            self._version += 1
            return MutationRecord(DELETE, 0, 1, vacuous=True)
        parent, lft, rgt, size = self._parent, self._left, self._right, self._size
        code = self._term[v]
        p = parent[v]
        u = rgt[p] if lft[p] == v else lft[p]
        g = parent[p]
        r = 0
        x, y = v, p
        while y != -1:
            if rgt[y] == x:
                r += size[lft[y]]
            x, y = y, parent[y]
        parent[u] = g
        if g == -1:
            self._root = u
        elif lft[g] == p:
            lft[g] = u
        else:
            rgt[g] = u
        y = g
        while y != -1:
            size[y] -= 1
            y = parent[y]
        del self._seq[r]
        self._unindex_leaf(v)
        hi, lo = (p, v) if p > v else (v, p)
        self._release(hi)
        self._release(lo)
        self._version += 1
        return MutationRecord(DELETE, r, 1, code, 0)

    def _unindex_leaf(self, v: int) -> None:
        slot = self._slot[v]
        last = self._leaves.pop()
        lterm = self._leaf_terms.pop()
        if last != v:
            self._leaves[slot] = last
            self._leaf_terms[slot] = lterm
            self._slot[last] = slot
        self._slot[v] = -1

    def _release(self, x: int) -> None:
        """Free node id ``x`` (already detached) by moving the last node into it."""
        last = len(self._term) - 1
        if x != last:
            lft, rgt, parent = self._left, self._right, self._parent
            p = parent[last]
            if p == -1:
                self._root = x
            elif lft[p] == last:
                lft[p] = x
            else:
                rgt[p] = x
            a, b = lft[last], rgt[last]
            if a != -1:
                parent[a] = x
                parent[b] = x
            lft[x], rgt[x], parent[x] = a, b, p
            self._term[x] = self._term[last]
            self._size[x] = self._size[last]
            slot = self._slot[last]
            self._slot[x] = slot
            if slot != -1:
                self._leaves[slot] = x
        for arr in (self._left, self._right, self._parent, self._term, self._size, self._slot):
            arr.pop()


def _parse_nested(text: str, n: Optional[int]) -> Nested:
    pos = 0
    L = len(text)
    stack: list[list] = []   # open joins: collected children
    result: Optional[Nested] = None

    def fail(msg: str):
        raise TreeParseError(f"{msg} at offset {pos} in {text!r}")

    while True:
        if text.startswith("(J ", pos):
            stack.append([])
            pos += 3
            continue
        m = _LEAF_RE.match(text, pos)
        if m is None:
            fail("expected '(J ' or a terminal")
        idx = int(m.group(2))
        if n is not None and idx > n:
            raise TreeParseError(f"variable index {idx} exceeds n={n}")
        node: Nested = -idx if m.group(1) else idx
        pos = m.end()
        while True:
            if not stack:
                result = node
                break
            kids = stack[-1]
            kids.append(node)
            if len(kids) == 1:
                if text.startswith(" ", pos) and not text.startswith(" )", pos):
                    pos += 1
                    break
                fail("join with fewer than two children")
            if pos < L and text[pos] == ")":
                pos += 1
                stack.pop()
                node = (kids[0], kids[1])
                continue
            fail("join with more than two children or missing ')'")
        if result is not None:
            break
    if pos != L:
        fail("trailing text")
    return result


def parse_tree(text: str, n: Optional[int] = None) -> GpTree:
    """Parse the canonical text form, e.g. ``"(J x1 (J ~x4 x2))"``."""
    if not isinstance(text, str):
        raise TypeError("expected text")
    return GpTree.from_nested(_parse_nested(text, n))


def serialize(tree: GpTree) -> str:
    return tree.serialize()


def inorder_leaves(tree: GpTree) -> list[Terminal]:
    return tree.inorder_leaves()


def hvl_prime_step(tree: GpTree, rng, n: int) -> MutationRecord:
    """One HVL-Mutate' application, in place: each sub-operation with probability 1/3."""
    return tree.apply_move(draw_move(rng, len(tree._leaves), n))


def iter_shapes(leaves: int) -> Iterator[Nested]:
    """All binary shapes with the given number of leaves; leaves are ``None``."""
    if leaves == 1:
        yield None
        return
    for k in range(1, leaves):
        for a in iter_shapes(k):
            for b in iter_shapes(leaves - k):
                yield (a, b)


def fill_shape(shape: Nested, codes: Iterable[int]) -> Nested:
    it = iter(codes)

    def go(s):
        if s is None:
            return next(it)
        return (go(s[0]), go(s[1]))

    return go(shape)
