"""Initial solutions used by the analyses and experiments."""
from __future__ import annotations

from .tree import GpTree, _below, parse_tree, random_terminal


def init_unity_expectation(n: int, rng) -> GpTree:
    """Random tree with 2n leaves, each terminal i.i.d. uniform over the 2n terminals."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return random_tree(2 * n, n, rng)


def random_tree(leaf_count: int, n: int, rng) -> GpTree:
    """Uniform-attachment shape with i.i.d. uniform terminals.

    Starting from a root join with two open slots, a join is placed into a
    uniformly chosen open slot until ``leaf_count`` slots exist; the slots
    are then filled in slot order.
    """
    if leaf_count < 1 or n < 1:
        raise ValueError("need leaf_count >= 1 and n >= 1")
    if leaf_count == 1:
        return GpTree.leaf(random_terminal(rng, n))
    # children[j] = [left, right]: a join id, or ("leaf", code) once filled
    children: list[list] = [[None, None]]
    slots = [(0, 0), (0, 1)]
    while len(slots) < leaf_count:
        k = _below(rng, len(slots))
        j, side = slots[k]
        new = len(children)
        children.append([None, None])
        children[j][side] = new
        slots[k] = (new, 0)
        slots.append((new, 1))
    for j, side in slots:
        children[j][side] = ("leaf", random_terminal(rng, n))

    # joins only point to larger ids, so assemble from the back
    nested: dict[int, object] = {}
    for j in range(len(children) - 1, -1, -1):
        a, b = (nested.pop(c) if isinstance(c, int) else c[1] for c in children[j])
        nested[j] = (a, b)
    return GpTree.from_nested(nested[0])


def init_adversarial_majority(n: int) -> GpTree:
    """2n copies of ~x1 on a left-leaning vine, so D_1 = 2n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return GpTree.vine([-1] * (2 * n))


def init_t_lopt(n: int) -> GpTree:
    """x_1 .. x_{n-1} once each, then n+1 copies of ~x_n; MAJORITY fitness n-1."""
    if n < 2:
        raise ValueError("t_lopt needs n >= 2")
    return GpTree.vine(list(range(1, n)) + [-n] * (n + 1))


def init_from_text(text: str, n: int) -> GpTree:
    return parse_tree(text, n)


def make_initial(ident: str, n: int, rng) -> GpTree:
    """Build the initial tree from an initializer id.

    Ids: ``unity``, ``adversarial-neg1``, ``t-lopt``, ``text:<serialized tree>``.
    """
    ident = ident.strip()
    if ident == "unity":
        return init_unity_expectation(n, rng)
    if ident == "adversarial-neg1":
        return init_adversarial_majority(n)
    if ident == "t-lopt":
        return init_t_lopt(n)
    if ident.startswith("text:"):
        return init_from_text(ident[5:], n)
    raise ValueError(f"unknown initializer {ident!r}")
