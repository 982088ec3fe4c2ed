"""Terms of the free binary system on one generator, viewed as binary trees.

A tree is either the generator (a single leaf, written "1") or a caret
joining two trees (written "(left right)").  Everything here is immutable
and pure: enumeration, parsing, attributes, addresses, substitution,
pruning, and dyadic interval representations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

DEFAULT_SIZE_CAP = 16


class TreeParseError(ValueError):
    """Malformed tree text; carries the 0-based offset of the failure."""

    def __init__(self, message, position):
        super().__init__(f"{message} (position {position})")
        self.position = position


class AddressError(ValueError):
    """An address walked off the tree; carries the first failing prefix."""

    def __init__(self, message, prefix):
        super().__init__(f"{message} (prefix {prefix!r})")
        self.prefix = prefix


class SizeCapError(ValueError):
    pass


class SubstitutionError(ValueError):
    pass


class Tree:
    """Immutable rooted ordered binary tree.

    ``size`` counts leaves, ``left_depth`` the leftmost-spine length, and
    ``right_spine`` the rightmost-spine length; all are fixed at
    construction so attribute reads are O(1).
    """

    __slots__ = ("left", "right", "size", "left_depth", "right_spine", "_hash")

    def __init__(self, left=None, right=None):
        if (left is None) != (right is None):
            raise ValueError("a caret needs both children")
        self.left = left
        self.right = right
        if left is None:
            self.size = 1
            self.left_depth = 0
            self.right_spine = 0
            self._hash = hash(("leaf",))
        else:
            self.size = left.size + right.size
            self.left_depth = left.left_depth + 1
            self.right_spine = right.right_spine + 1
            self._hash = hash((left._hash, right._hash))

    @property
    def is_leaf(self):
        return self.left is None

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Tree):
            return NotImplemented
        if self.size != other.size or self._hash != other._hash:
            return False
        if self.is_leaf:
            return other.is_leaf
        if other.is_leaf:
            return False
        return self.left == other.left and self.right == other.right

    def __lt__(self, other):
        return _cmp(self, other) < 0

    def __le__(self, other):
        return _cmp(self, other) <= 0

    def __gt__(self, other):
        return _cmp(self, other) > 0

    def __ge__(self, other):
        return _cmp(self, other) >= 0

    def __repr__(self):
        return f"Tree({format_tree(self)!r})"

    def __str__(self):
        return format_tree(self)


LEAF = Tree()


def caret(left: Tree, right: Tree) -> Tree:
    """Join two trees under a new root."""
    return Tree(left, right)


def _cmp(s: Tree, t: Tree) -> int:
    # Canonical order: smaller total size first; among equal sizes, larger
    # left subtree first, ties broken by comparing left then right children.
    if s is t:
        return 0
    if s.size != t.size:
        return -1 if s.size < t.size else 1
    if s.is_leaf:
        return 0
    if s.left.size != t.left.size:
        return -1 if s.left.size > t.left.size else 1
    c = _cmp(s.left, t.left)
    if c:
        return c
    return _cmp(s.right, t.right)


def format_tree(t: Tree) -> str:
    if t.is_leaf:
        return "1"
    return f"({format_tree(t.left)} {format_tree(t.right)})"


def parse_tree(text: str) -> Tree:
    """Parse the grammar  t := "1" | "(" t " " t ")".  Round-trips format_tree."""
    pos = 0

    def skip_ws(i):
        while i < len(text) and text[i] == " ":
            i += 1
        return i

    def term(i):
        if i >= len(text):
            raise TreeParseError("unexpected end of input", i)
        ch = text[i]
        if ch == "1":
            return LEAF, i + 1
        if ch != "(":
            raise TreeParseError(f"expected '1' or '(', found {ch!r}", i)
        left, i = term(skip_ws(i + 1))
        i = skip_ws(i)
        right, i = term(i)
        i = skip_ws(i)
        if i >= len(text) or text[i] != ")":
            raise TreeParseError("expected ')'", i)
        return Tree(left, right), i + 1

    pos = skip_ws(pos)
    tree, pos = term(pos)
    pos = skip_ws(pos)
    if pos != len(text):
        raise TreeParseError(f"trailing input {text[pos:]!r}", pos)
    return tree


_ENUM_CACHE: dict[int, tuple[Tree, ...]] = {1: (LEAF,)}


def _all_trees(n):
    cached = _ENUM_CACHE.get(n)
    if cached is not None:
        return cached
    trees = []
    for left_size in range(n - 1, 0, -1):
        for a in _all_trees(left_size):
            for b in _all_trees(n - left_size):
                trees.append(Tree(a, b))
    result = tuple(trees)
    _ENUM_CACHE[n] = result
    return result


def enumerate_trees(n: int, cap: int = DEFAULT_SIZE_CAP) -> tuple[Tree, ...]:
    """All trees with n leaves, in canonical order.

    The order is part of the public contract: coloring files index into it.
    """
    if n < 1:
        raise ValueError(f"tree size must be >= 1, got {n}")
    if n > cap:
        raise SizeCapError(f"size {n} exceeds cap {cap}")
    return _all_trees(n)


_INDEX_CACHE: dict[int, dict[Tree, int]] = {}


def canonical_index(t: Tree, cap: int = DEFAULT_SIZE_CAP) -> int:
    """Position of t within enumerate_trees(t.size)."""
    table = _INDEX_CACHE.get(t.size)
    if table is None:
        table = {u: i for i, u in enumerate(enumerate_trees(t.size, cap))}
        _INDEX_CACHE[t.size] = table
    return table[t]


@dataclass(frozen=True)
class TreeStats:
    size: int
    left_depth: int
    right_spine: int


def tree_stats(t: Tree) -> TreeStats:
    return TreeStats(t.size, t.left_depth, t.right_spine)


def dyadic_repr(t: Tree) -> frozenset:
    """The finite set of dyadic rationals in (0, 1] encoding t.

    The generator is {1}; a caret halves the left set and halves the
    right set shifted by one.  The map is injective, which is what makes
    the single-generator system free.
    """
    if t.is_leaf:
        return frozenset((Fraction(1),))
    half = Fraction(1, 2)
    left = dyadic_repr(t.left)
    right = dyadic_repr(t.right)
    return frozenset(x * half for x in left) | frozenset((x + 1) * half for x in right)


def check_address(sigma: str) -> str:
    for ch in sigma:
        if ch not in "01":
            raise ValueError(f"address must be a 0/1 string, got {sigma!r}")
    return sigma


def subterm(t: Tree, sigma: str) -> Tree:
    """Subterm at binary address sigma; the empty address is t itself."""
    check_address(sigma)
    node = t
    for i, ch in enumerate(sigma):
        if node.is_leaf:
            raise AddressError("address descends below a leaf", sigma[: i + 1])
        node = node.left if ch == "0" else node.right
    return node


def has_address(t: Tree, sigma: str) -> bool:
    node = t
    for ch in sigma:
        if node.is_leaf:
            return False
        node = node.left if ch == "0" else node.right
    return True


def substitute(t: Tree, replacements) -> Tree:
    """Replace the leaves of t, left to right, by the given trees."""
    replacements = tuple(replacements)
    if len(replacements) != t.size:
        raise SubstitutionError(
            f"need {t.size} replacement trees, got {len(replacements)}"
        )
    it = iter(replacements)

    def go(node):
        if node.is_leaf:
            return next(it)
        return Tree(go(node.left), go(node.right))

    return go(t)


def prune(t: Tree, k: int) -> Tree:
    """Collapse the part of t to the right of leaf index k.

    Recursion: a leaf stays a leaf; a caret keeps its left child pruned and
    caps the right with a leaf while k falls inside the left child, and
    otherwise recurses into the right child with the index shifted.
    """
    if not 0 <= k < t.size:
        raise ValueError(f"leaf index {k} out of range for size {t.size}")

    def go(node, j):
        if node.is_leaf:
            return LEAF
        if j < node.left.size:
            return Tree(go(node.left, j), LEAF)
        return Tree(node.left, go(node.right, j - node.left.size))

    return go(t, k)


@dataclass(frozen=True)
class AdmissibilityReport:
    bounds: tuple[int, ...]
    admissible: bool


def admissibility(t: Tree, indices) -> AdmissibilityReport:
    """Per-leaf pruning bounds of t and whether the index sequence clears them.

    bounds[k] is the size of the k-pruned tree minus two; the sequence is
    admissible when every bound is at most the matching index.
    """
    indices = tuple(indices)
    if len(indices) != t.size:
        raise ValueError(f"need {t.size} indices, got {len(indices)}")
    for a, b in zip(indices, indices[1:]):
        if b <= a:
            raise ValueError("index sequence must be strictly increasing")
    bounds = tuple(prune(t, k).size - 2 for k in range(t.size))
    ok = all(b <= i for b, i in zip(bounds, indices))
    return AdmissibilityReport(bounds, ok)


def left_comb(m: int) -> Tree:
    """The fully left-associated tree with m leaves."""
    if m < 1:
        raise ValueError("size must be >= 1")
    t = LEAF
    for _ in range(m - 1):
        t = Tree(t, LEAF)
    return t


def right_comb(m: int) -> Tree:
    """The fully right-associated tree with m leaves."""
    if m < 1:
        raise ValueError("size must be >= 1")
    t = LEAF
    for _ in range(m - 1):
        t = Tree(LEAF, t)
    return t


def decompose(t: Tree, pattern: Tree):
    """Per-leaf subtrees of t relative to pattern, or None when t does not
    refine pattern.

    When it succeeds, substitute(pattern, result) == t.
    """
    out = []

    def go(node, pat):
        if pat.is_leaf:
            out.append(node)
            return True
        if node.is_leaf:
            return False
        return go(node.left, pat.left) and go(node.right, pat.right)

    return out if go(t, pattern) else None


def common_refinement(a: Tree, b: Tree) -> Tree:
    """Smallest tree refining both arguments (union of dyadic partitions)."""
    if a.is_leaf:
        return b
    if b.is_leaf:
        return a
    return Tree(common_refinement(a.left, b.left), common_refinement(a.right, b.right))
