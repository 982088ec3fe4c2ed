"""Thompson's group F as reduced pairs of equal-size trees.

An element maps the dyadic partition of its domain tree onto that of its
range tree, extended piecewise linearly.  Composition works by refining
both pairs over a common partition; an independent piecewise-linear map
oracle (exact breakpoint arithmetic) backs the tree machinery in tests.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction

from .measures import Measure
from .trees import (
    LEAF,
    Tree,
    common_refinement,
    decompose,
    dyadic_repr,
    format_tree,
    parse_tree,
    substitute,
)

GENERATOR_CAP = 16


class FElement:
    """A reduced (domain -> range) tree pair.  Build via from_tree_pair."""

    __slots__ = ("domain", "range")

    def __init__(self, domain: Tree, range_: Tree, _reduced: bool = False):
        if domain.size != range_.size:
            raise ValueError(
                f"tree pair sizes differ: {domain.size} vs {range_.size}"
            )
        if not _reduced:
            domain, range_ = _reduce_pair(domain, range_)
        self.domain = domain
        self.range = range_

    def __eq__(self, other):
        if not isinstance(other, FElement):
            return NotImplemented
        return self.domain == other.domain and self.range == other.range

    def __hash__(self):
        return hash((self.domain, self.range))

    def __repr__(self):
        return f"FElement({format_felement(self)!r})"

    def __str__(self):
        return format_felement(self)


def _sibling_leaf_pairs(t: Tree):
    """Leaf indices i such that leaves i and i+1 hang off one caret."""
    pairs = set()

    def go(node, offset):
        if node.is_leaf:
            return
        if node.left.is_leaf and node.right.is_leaf:
            pairs.add(offset)
            return
        go(node.left, offset)
        go(node.right, offset + node.left.size)

    go(t, 0)
    return pairs


def _contract(t: Tree, i: int) -> Tree:
    # replace the leaf-pair caret at leaf index i by a single leaf
    if t.left.is_leaf and t.right.is_leaf:
        return LEAF
    if i <= t.left.size - 2:
        return Tree(_contract(t.left, i), t.right)
    return Tree(t.left, _contract(t.right, i - t.left.size))


def _reduce_pair(s: Tree, t: Tree):
    while True:
        common = _sibling_leaf_pairs(s) & _sibling_leaf_pairs(t)
        if not common:
            return s, t
        i = min(common)
        s = _contract(s, i)
        t = _contract(t, i)


def from_tree_pair(domain: Tree, range_: Tree) -> FElement:
    """The element carrying the partition of domain onto that of range,
    stored in reduced form."""
    return FElement(domain, range_)


def identity_element() -> FElement:
    return FElement(LEAF, LEAF, _reduced=True)


def invert(f: FElement) -> FElement:
    return FElement(f.range, f.domain, _reduced=True)


def compose(f: FElement, g: FElement) -> FElement:
    """Function composition: the result maps x to f(g(x)).

    Both pairs are expanded over the common refinement of g's range
    partition and f's domain partition, then glued and reduced.
    """
    u = common_refinement(g.range, f.domain)
    via_g = decompose(u, g.range)
    via_f = decompose(u, f.domain)
    new_domain = substitute(g.domain, via_g)
    new_range = substitute(f.range, via_f)
    return FElement(new_domain, new_range)


_X0 = None
_X1 = None
_GEN_CACHE = []


def generator(k: int, cap: int = GENERATOR_CAP) -> FElement:
    """The standard generator x_k; higher ones arise by conjugating x_1 by
    powers of x_0."""
    global _X0, _X1
    if k < 0:
        raise ValueError("generator index must be nonnegative")
    if k > cap:
        raise ValueError(f"generator index {k} exceeds cap {cap}")
    if _X0 is None:
        _X0 = FElement(
            parse_tree("((1 1) 1)"), parse_tree("(1 (1 1))"), _reduced=True
        )
        _X1 = FElement(
            parse_tree("(1 ((1 1) 1))"), parse_tree("(1 (1 (1 1)))"), _reduced=True
        )
        _GEN_CACHE.extend([_X0, _X1])
    while len(_GEN_CACHE) <= k:
        previous = _GEN_CACHE[-1]
        _GEN_CACHE.append(compose(_X0, compose(previous, invert(_X0))))
    return _GEN_CACHE[k]


def partial_apply(f: FElement, t: Tree) -> Tree | None:
    """Apply f to a tree set-wise; None when t does not refine f's domain.

    Defined exactly when the dyadic set of t contains every breakpoint of
    f, in which case the image is again a tree.
    """
    parts = decompose(t, f.domain)
    if parts is None:
        return None
    return substitute(f.range, parts)


@dataclass(frozen=True)
class InvarianceDefect:
    undefined_mass: Fraction
    tv_defect: Fraction


def invariance_defect(mu: Measure, f: FElement) -> InvarianceDefect:
    """How far mu is from f-invariance: the mass where the action is
    undefined, and the total-variation gap between the defined part and
    its image."""
    undefined = Fraction(0)
    kept = {}
    moved = {}
    for t, w in mu.items():
        image = partial_apply(f, t)
        if image is None:
            undefined += w
        else:
            kept[t] = kept.get(t, Fraction(0)) + w
            moved[image] = moved.get(image, Fraction(0)) + w
    keys = set(kept) | set(moved)
    tv = sum(
        (abs(kept.get(x, Fraction(0)) - moved.get(x, Fraction(0))) for x in keys),
        Fraction(0),
    ) / 2
    return InvarianceDefect(undefined, tv)


def format_felement(f: FElement) -> str:
    return f"{format_tree(f.domain)} -> {format_tree(f.range)}"


def parse_felement(text: str) -> FElement:
    parts = text.split("->")
    if len(parts) != 2:
        raise ValueError(f"expected 'domain -> range', got {text!r}")
    return from_tree_pair(parse_tree(parts[0].strip()), parse_tree(parts[1].strip()))


# ---------------------------------------------------------------------------
# Piecewise-linear map oracle
# ---------------------------------------------------------------------------


def pl_breakpoints(f: FElement):
    """The PL homeomorphism of [0, 1] as exact (x, y) vertices."""
    xs = [Fraction(0)] + sorted(dyadic_repr(f.domain))
    ys = [Fraction(0)] + sorted(dyadic_repr(f.range))
    return normalize_pl(tuple(zip(xs, ys)))


def normalize_pl(points):
    """Drop interior vertices lying on the segment through their neighbors."""
    points = list(points)
    out = [points[0]]
    for i in range(1, len(points) - 1):
        x0, y0 = out[-1]
        x1, y1 = points[i]
        x2, y2 = points[i + 1]
        if (y1 - y0) * (x2 - x1) == (y2 - y1) * (x1 - x0):
            continue
        out.append(points[i])
    out.append(points[-1])
    return tuple(out)


def eval_pl(points, x: Fraction) -> Fraction:
    xs = [p[0] for p in points]
    if not points[0][0] <= x <= points[-1][0]:
        raise ValueError(f"{x} outside [{points[0][0]}, {points[-1][0]}]")
    i = bisect_right(xs, x)
    if i == len(xs):
        return points[-1][1]
    x0, y0 = points[i - 1]
    x1, y1 = points[i]
    if x == x0:
        return y0
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0)


def invert_pl(points):
    return tuple((y, x) for x, y in points)


def compose_pl(outer, inner):
    """Exact composition x -> outer(inner(x)) of increasing PL maps."""
    inner_inv = invert_pl(inner)
    xs = {p[0] for p in inner}
    xs.update(eval_pl(inner_inv, q[0]) for q in outer)
    grid = sorted(xs)
    return normalize_pl(tuple((x, eval_pl(outer, eval_pl(inner, x))) for x in grid))


def pl_equal(a, b) -> bool:
    return normalize_pl(a) == normalize_pl(b)
