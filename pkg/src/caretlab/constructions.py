"""Finite measurement instruments for address statistics and the spine
constructions: order profiles over incompatible addresses, bit-string
spine trees, the dyadic-divisibility collapse map, the odometer reading
of a tree, and membership in spine-generated subsystems.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .measures import Measure, pushforward
from .trees import LEAF, Tree, caret, check_address, has_address, subterm


@dataclass(frozen=True)
class QuasiOrder:
    """A linear quasi-order on trees given by its 'less or equivalent' test."""

    name: str
    leq: Callable[[Tree, Tree], bool]

    def compare(self, s: Tree, t: Tree) -> str:
        a = self.leq(s, t)
        b = self.leq(t, s)
        if a and b:
            return "eq"
        if a:
            return "lt"
        if b:
            return "gt"
        raise ValueError(f"{self.name} is not total on ({s}, {t})")


SIZE_ORDER = QuasiOrder("size", lambda s, t: s.size <= t.size)


def incompatible(sigma: str, varsigma: str) -> bool:
    """Neither address is a prefix of the other."""
    check_address(sigma)
    check_address(varsigma)
    shorter = min(len(sigma), len(varsigma))
    return sigma[:shorter] != varsigma[:shorter]


@dataclass(frozen=True)
class AddressProfile:
    less: Fraction
    greater: Fraction
    equivalent: Fraction
    undefined: Fraction


def address_profile(
    mu: Measure, sigma: str, varsigma: str, order: QuasiOrder = SIZE_ORDER
) -> AddressProfile:
    """Partition the mass of mu by comparing the subterms at two
    incompatible addresses; trees missing either address count as
    undefined."""
    if not incompatible(sigma, varsigma):
        raise ValueError(f"addresses {sigma!r} and {varsigma!r} are compatible")
    buckets = {"lt": Fraction(0), "gt": Fraction(0), "eq": Fraction(0)}
    undefined = Fraction(0)
    for t, w in mu.items():
        if not (has_address(t, sigma) and has_address(t, varsigma)):
            undefined += w
            continue
        buckets[order.compare(subterm(t, sigma), subterm(t, varsigma))] += w
    return AddressProfile(buckets["lt"], buckets["gt"], buckets["eq"], undefined)


@dataclass(frozen=True)
class MonotonicityProfile:
    ascending: Fraction
    descending: Fraction
    other: Fraction


_CHAIN_ADDRESSES = ("001", "01", "10")


def monotonicity_profile(mu: Measure) -> MonotonicityProfile:
    """Mass of the two strict size chains along the addresses 001, 01, 10,
    and everything else (including trees missing one of the addresses)."""
    ascending = Fraction(0)
    descending = Fraction(0)
    other = Fraction(0)
    for t, w in mu.items():
        if not all(has_address(t, a) for a in _CHAIN_ADDRESSES):
            other += w
            continue
        x, y, z = (subterm(t, a).size for a in _CHAIN_ADDRESSES)
        if x < y < z:
            ascending += w
        elif z < y < x:
            descending += w
        else:
            other += w
    return MonotonicityProfile(ascending, descending, other)


def check_bits(bits: str, minimum: int = 1) -> str:
    if len(bits) < minimum:
        raise ValueError(f"bit string must have length >= {minimum}")
    for ch in bits:
        if ch not in "01":
            raise ValueError(f"bit string must be 0/1, got {bits!r}")
    return bits


def spine_tree(bits: str) -> Tree:
    """The tree of size len(bits) built by prepending: a leading 0 carets
    the smaller tree with a leaf on the right, a leading 1 on the left."""
    check_bits(bits)
    if len(bits) == 1:
        return LEAF
    inner = spine_tree(bits[1:])
    return caret(inner, LEAF) if bits[0] == "0" else caret(LEAF, inner)


def dyadically_below(a: Tree, b: Tree) -> bool:
    """True when some power of two exceeds the size of a and divides the
    size of b."""
    nb = b.size
    p = 0
    power = 1
    while power <= nb:
        if a.size < power and nb % power == 0:
            return True
        p += 1
        power <<= 1
    return False


def spine_collapse(t: Tree, bits: str) -> Tree:
    """Size-preserving projection onto the spine-tree family.

    A caret whose left side is dyadically below its right side splits and
    both parts recurse; any other tree is replaced wholesale by the spine
    tree of its size.  Needs len(bits) >= size of t.
    """
    check_bits(bits)
    if len(bits) < t.size:
        raise ValueError(f"bit string length {len(bits)} < tree size {t.size}")
    cache = {}

    def go(node):
        hit = cache.get(node)
        if hit is not None:
            return hit
        if not node.is_leaf and dyadically_below(node.left, node.right):
            result = caret(go(node.left), go(node.right))
        else:
            result = spine_tree(bits[: node.size])
        cache[node] = result
        return result

    return go(t)


def spine_collapse_measure(mu: Measure, bits: str) -> Measure:
    check_bits(bits)
    top = max(t.size for t in mu.support())
    if len(bits) < top:
        raise ValueError(f"bit string length {len(bits)} < max support size {top}")
    return pushforward(lambda t: spine_collapse(t, bits), mu)


def odometer_bits(t: Tree, precision: int) -> str:
    """First `precision` bits, least significant first, of the right-spine
    count of t."""
    if precision < 1:
        raise ValueError("precision must be >= 1")
    spine = t.right_spine
    return "".join(str((spine >> i) & 1) for i in range(precision))


def odometer_bits_recursive(t: Tree, precision: int) -> str:
    """Same reading computed by the raw recursion: the leaf is all zeros
    and a caret increments the right child's bits with carry."""
    if precision < 1:
        raise ValueError("precision must be >= 1")

    def increment(bits):
        out = list(bits)
        for i in range(len(out)):
            if out[i] == 0:
                out[i] = 1
                return out
            out[i] = 0
        return out  # overflow past the precision window drops the carry

    def go(node):
        if node.is_leaf:
            return [0] * precision
        return increment(go(node.right))

    return "".join(str(b) for b in go(t))


def matches_odometer_prefix(t: Tree, bits: str, precision: int) -> bool:
    """Whether the first `precision` odometer bits of t agree with bits."""
    check_bits(bits)
    if precision < 1 or precision > len(bits):
        raise ValueError(f"precision {precision} out of range for {bits!r}")
    return odometer_bits(t, precision) == bits[:precision]


def in_spine_span(t: Tree, bits: str, min_index: int) -> bool:
    """Membership in the subsystem generated by the spine trees of prefix
    lengths k with min_index < k <= len(bits).

    A tree belongs when it equals an available generator or both children
    do; the recursion is memoized per call.
    """
    check_bits(bits)
    if min_index < 0:
        raise ValueError("min_index must be >= 0")
    cache = {}

    def go(node):
        hit = cache.get(node)
        if hit is not None:
            return hit
        result = False
        k = node.size
        if min_index < k <= len(bits) and node == spine_tree(bits[:k]):
            result = True
        elif not node.is_leaf:
            result = go(node.left) and go(node.right)
        cache[node] = result
        return result

    return go(t)
