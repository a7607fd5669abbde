"""ORDER and MAJORITY fitness, evaluated by inspecting the inorder leaf list."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .tree import Terminal


class ProblemKind(str, Enum):
    ORDER = "order"
    MAJORITY = "majority"

    @classmethod
    def parse(cls, value) -> "ProblemKind":
        if isinstance(value, cls):
            return value
        return cls(str(value).strip().lower())


def _check_indices(leaves: Iterable[int], n: int) -> None:
    for t in leaves:
        if t == 0 or abs(t) > n:
            raise ValueError(f"terminal {t} outside 1..{n}")


def order_value(seq: Sequence[int], n: int) -> int:
    """ORDER fitness of an inorder code sequence (no path, no validation)."""
    seen = set()
    f = 0
    for t in seq:
        i = t if t > 0 else -t
        if i in seen:
            continue
        seen.add(i)
        if t > 0:
            f += 1
        if len(seen) == n:
            break
    return f


def order_fitness(leaves: Sequence[int], n: int) -> tuple[int, list[Terminal]]:
    """Fitness and conditional execution path for ORDER.

    A leaf enters the path only if neither it nor its complement is already
    there; fitness counts the positive terminals on the path.
    """
    _check_indices(leaves, n)
    seen = set()
    path: list[Terminal] = []
    for t in leaves:
        i = abs(t)
        if i in seen:
            continue
        seen.add(i)
        path.append(Terminal.from_code(t))
        if len(seen) == n:
            break
    return sum(1 for t in path if t > 0), path


@dataclass(frozen=True)
class DeficitProfile:
    """Per-variable counts; ``pos[i-1] = c(x_i)`` and ``neg[i-1] = c(~x_i)``."""

    pos: tuple[int, ...]
    neg: tuple[int, ...]

    @classmethod
    def from_leaves(cls, leaves: Iterable[int], n: int) -> "DeficitProfile":
        pos = [0] * n
        neg = [0] * n
        for t in leaves:
            if t == 0 or abs(t) > n:
                raise ValueError(f"terminal {t} outside 1..{n}")
            if t > 0:
                pos[t - 1] += 1
            else:
                neg[-t - 1] += 1
        return cls(tuple(pos), tuple(neg))

    @property
    def n(self) -> int:
        return len(self.pos)

    @property
    def leaf_count(self) -> int:
        return sum(self.pos) + sum(self.neg)

    def _i(self, i: int) -> int:
        if not 1 <= i <= len(self.pos):
            raise IndexError(f"variable index {i} outside 1..{len(self.pos)}")
        return i - 1

    def c_pos(self, i: int) -> int:
        return self.pos[self._i(i)]

    def c_neg(self, i: int) -> int:
        return self.neg[self._i(i)]

    def deficit(self, i: int) -> int:
        j = self._i(i)
        return self.neg[j] - self.pos[j]

    def deficits(self) -> list[int]:
        return [b - a for a, b in zip(self.pos, self.neg)]

    @property
    def max_deficit(self) -> int:
        return max(self.deficits())

    def expressed_set(self) -> list[Terminal]:
        return [Terminal(i + 1) for i, (a, b) in enumerate(zip(self.pos, self.neg)) if a >= 1 and a >= b]

    @property
    def fitness(self) -> int:
        return sum(1 for a, b in zip(self.pos, self.neg) if a >= 1 and a >= b)


def majority_fitness(leaves: Sequence[int], n: int) -> tuple[int, DeficitProfile]:
    """MAJORITY fitness: variables with c(x_i) >= c(~x_i) and c(x_i) >= 1."""
    profile = DeficitProfile.from_leaves(leaves, n)
    return profile.fitness, profile


def expressed(profile: DeficitProfile, i: int) -> bool:
    return profile.deficit(i) <= 0 and profile.c_pos(i) > 0


def is_stuck_gpstar_single_majority(profile: DeficitProfile, n: int) -> bool:
    """True iff strict single-operation hill climbing can never improve again.

    One sub-operation moves any deficit by at most two, and variables with
    no occurrences are fixed by one insertion, so the climber is trapped
    exactly when every unexpressed variable carries a deficit of at least 3.
    """
    if profile.n != n:
        raise ValueError("profile size does not match n")
    stuck = False
    for a, b in zip(profile.pos, profile.neg):
        if a >= 1 and a >= b:
            continue
        if b - a < 3:
            return False
        stuck = True
    return stuck


def evaluate(problem: ProblemKind, leaves: Sequence[int], n: int) -> int:
    if problem is ProblemKind.ORDER:
        return order_fitness(leaves, n)[0]
    return majority_fitness(leaves, n)[0]
