"""Finitely supported probability measures with exact rational weights.

Measures live over an arbitrary discrete carrier (trees, magma elements,
tuples).  All identities here are exact, so weights are Fractions from
construction to output; floats are rejected outright.
"""

from __future__ import annotations

import csv
from fractions import Fraction

from .trees import Tree, caret, format_tree, parse_tree


class MeasureError(ValueError):
    pass


class CarrierMismatch(ValueError):
    pass


class EvaluationError(ValueError):
    pass


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and 'p/q' strings; floats are a bug, reject them."""
    if isinstance(value, float):
        raise TypeError(f"refusing float weight {value!r}; pass an exact rational")
    return Fraction(value)


def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


class Measure:
    """Probability measure with finite support and exact positive weights.

    Construction validates rather than repairs: weights must be
    nonnegative and sum to exactly 1 (zero entries are dropped, duplicate
    elements are aggregated, but nothing is silently renormalized).
    """

    __slots__ = ("_weights",)

    def __init__(self, pairs):
        if hasattr(pairs, "items"):
            pairs = pairs.items()
        acc = {}
        for element, raw in pairs:
            w = as_fraction(raw)
            if w < 0:
                raise MeasureError(f"negative weight {w} at {element!r}")
            if w == 0:
                continue
            acc[element] = acc.get(element, Fraction(0)) + w
        total = sum(acc.values(), Fraction(0))
        if total != 1:
            raise MeasureError(f"weights sum to {total}, expected exactly 1")
        items = sorted(acc.items(), key=lambda kv: kv[0])
        self._weights = dict(items)

    @classmethod
    def point(cls, element) -> "Measure":
        return cls([(element, Fraction(1))])

    def items(self):
        return tuple(self._weights.items())

    def support(self):
        return tuple(self._weights.keys())

    def weight(self, element) -> Fraction:
        return self._weights.get(element, Fraction(0))

    def mass(self, event) -> Fraction:
        """Weight of an event given as a container or a predicate."""
        if callable(event):
            member = event
        else:
            member = event.__contains__
        return sum(
            (w for x, w in self._weights.items() if member(x)), Fraction(0)
        )

    def support_size(self):
        """Common tree size of the support, or None when sizes are mixed."""
        sizes = {x.size for x in self._weights if isinstance(x, Tree)}
        if len(sizes) == 1 and len(self._weights) == len(
            [x for x in self._weights if isinstance(x, Tree)]
        ):
            return sizes.pop()
        return None

    def __len__(self):
        return len(self._weights)

    def __eq__(self, other):
        if not isinstance(other, Measure):
            return NotImplemented
        return self._weights == other._weights

    def __hash__(self):
        return hash(tuple(self._weights.items()))

    def __repr__(self):
        body = " + ".join(f"{frac_str(w)}*{x!s}" for x, w in self._weights.items())
        return f"Measure({body})"


def make_measure(pairs) -> Measure:
    return Measure(pairs)


class BinarySystem:
    """A binary operation together with a carrier membership test."""

    __slots__ = ("name", "_apply", "_contains")

    def __init__(self, name, apply, contains):
        self.name = name
        self._apply = apply
        self._contains = contains

    def apply(self, x, y):
        return self._apply(x, y)

    def contains(self, x) -> bool:
        return self._contains(x)

    def check_measure(self, mu: Measure):
        for x in mu.support():
            if not self.contains(x):
                raise CarrierMismatch(
                    f"support element {x!r} is not in the {self.name} carrier"
                )

    def __repr__(self):
        return f"BinarySystem({self.name!r})"


CARET_SYSTEM = BinarySystem("caret", caret, lambda x: isinstance(x, Tree))


def tensor(mu: Measure, nu: Measure) -> Measure:
    """Product measure over pairs; weight of (x, y) is mu({x}) * nu({y})."""
    return Measure(
        ((x, y), wx * wy) for x, wx in mu.items() for y, wy in nu.items()
    )


def convolve(system: BinarySystem, mu: Measure, nu: Measure) -> Measure:
    """Pushforward of the product measure along the binary operation."""
    system.check_measure(mu)
    system.check_measure(nu)
    acc = {}
    for x, wx in mu.items():
        for y, wy in nu.items():
            z = system.apply(x, y)
            acc[z] = acc.get(z, Fraction(0)) + wx * wy
    return Measure(acc)


def substitute_measures(t: Tree, measures, system: BinarySystem = CARET_SYSTEM) -> Measure:
    """Multilinear substitution of one measure per leaf of t.

    The tree is folded bottom-up with convolve at each caret, which equals
    the sum over support tuples of weight products on the substituted tree.
    """
    measures = tuple(measures)
    if len(measures) != t.size:
        raise MeasureError(f"need {t.size} measures, got {len(measures)}")
    for mu in measures:
        system.check_measure(mu)
    it = iter(measures)

    def go(node):
        if node.is_leaf:
            return next(it)
        return convolve(system, go(node.left), go(node.right))

    return go(t)


def evaluate(values, mu: Measure) -> Fraction:
    """Linear extension: sum of mu({x}) * values(x) over the support."""
    if callable(values):
        lookup = values
    else:
        def lookup(x):
            if x not in values:
                raise EvaluationError(f"function undefined at support point {x!r}")
            return values[x]

    return sum(
        (w * as_fraction(lookup(x)) for x, w in mu.items()), Fraction(0)
    )


def pushforward(phi, mu: Measure) -> Measure:
    """Image measure under a map defined on all of the support."""
    acc = {}
    for x, w in mu.items():
        y = phi(x)
        if y is None:
            raise MeasureError(f"map undefined at support point {x!r}")
        acc[y] = acc.get(y, Fraction(0)) + w
    return Measure(acc)


def family_seminorm(mu: Measure, nu: Measure, family) -> Fraction:
    """max over the family of |mu(E) - nu(E)|, events as sets or predicates."""
    best = Fraction(0)
    for event in family:
        gap = abs(mu.mass(event) - nu.mass(event))
        if gap > best:
            best = gap
    return best


MEASURE_HEADER = ("tree", "weight")


def save_measure(path, mu: Measure):
    """Write a tree measure as CSV rows `tree,weight` in canonical order."""
    for x in mu.support():
        if not isinstance(x, Tree):
            raise MeasureError("measure files hold tree measures only")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MEASURE_HEADER)
        for t, w in mu.items():
            writer.writerow([format_tree(t), frac_str(w)])


def load_measure(path) -> Measure:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != list(MEASURE_HEADER):
            raise MeasureError(f"{path}: expected header {','.join(MEASURE_HEADER)}")
        pairs = []
        for row in reader:
            if not row:
                continue
            if len(row) != 2:
                raise MeasureError(f"{path}: bad row {row!r}")
            pairs.append((parse_tree(row[0]), as_fraction(row[1])))
    return Measure(pairs)
