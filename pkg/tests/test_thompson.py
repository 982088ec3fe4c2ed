import random
from fractions import Fraction as F

import pytest

from caretlab.measures import (
    CARET_SYSTEM,
    Measure,
    convolve,
    make_measure,
    pushforward,
)
from caretlab.thompson import (
    _contract,
    _sibling_leaf_pairs,
    compose,
    compose_pl,
    eval_pl,
    format_felement,
    from_tree_pair,
    generator,
    identity_element,
    invariance_defect,
    invert,
    parse_felement,
    partial_apply,
    pl_breakpoints,
    pl_equal,
)
from caretlab.trees import (
    LEAF,
    caret,
    dyadic_repr,
    enumerate_trees,
    parse_tree,
)


def trees_upto(n):
    out = []
    for s in range(1, n + 1):
        out.extend(enumerate_trees(s))
    return out


def random_word(rng, length):
    """Word in the first two generators and their inverses."""
    f = identity_element()
    for _ in range(length):
        g = generator(rng.randint(0, 1))
        if rng.random() < 0.5:
            g = invert(g)
        f = compose(f, g)
    return f


class TestConstruction:
    def test_identity_reduction(self):
        for s in trees_upto(5):
            assert from_tree_pair(s, s) == identity_element()

    def test_x0_literal_already_reduced(self):
        f = from_tree_pair(parse_tree("((1 1) 1)"), parse_tree("(1 (1 1))"))
        assert f == generator(0)
        assert f.domain == parse_tree("((1 1) 1)")

    def test_common_caret_cancels(self):
        # grafting a caret onto the same leaf of both trees is invisible
        f = from_tree_pair(
            parse_tree("((1 1) (1 1))"), parse_tree("(1 (1 (1 1)))")
        )
        assert f == generator(0)

    def test_expansion_invisible_everywhere(self):
        rng = random.Random(21)
        pool = trees_upto(4)
        for _ in range(60):
            s = rng.choice(pool)
            t = rng.choice([u for u in pool if u.size == s.size])
            f = from_tree_pair(s, t)
            leaf = rng.randrange(s.size)
            graft = [LEAF] * s.size
            graft[leaf] = parse_tree("(1 1)")
            from caretlab.trees import substitute

            expanded = from_tree_pair(substitute(s, graft), substitute(t, graft))
            assert expanded == f

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            from_tree_pair(LEAF, parse_tree("(1 1)"))

    def test_reduction_confluence(self):
        # cancelling in the opposite order reaches the same reduced pair
        def reduce_max_first(s, t):
            while True:
                common = _sibling_leaf_pairs(s) & _sibling_leaf_pairs(t)
                if not common:
                    return s, t
                i = max(common)
                s, t = _contract(s, i), _contract(t, i)

        rng = random.Random(8)
        pool = trees_upto(6)
        for _ in range(200):
            s = rng.choice(pool)
            candidates = [u for u in pool if u.size == s.size]
            t = rng.choice(candidates)
            f = from_tree_pair(s, t)
            alt = reduce_max_first(s, t)
            assert (f.domain, f.range) == alt


class TestComposeInvert:
    def test_inverse_cancels(self):
        x0 = generator(0)
        assert compose(x0, invert(x0)) == identity_element()
        assert compose(invert(x0), x0) == identity_element()

    def test_invert_swaps(self):
        f = from_tree_pair(parse_tree("((1 1) 1)"), parse_tree("(1 (1 1))"))
        g = invert(f)
        assert g.domain == f.range and g.range == f.domain

    def test_x0_squared_reduced_size(self):
        f = compose(generator(0), generator(0))
        assert f.domain.size == 4 and f.range.size == 4

    def test_composition_matches_pl_oracle(self):
        rng = random.Random(17)
        for _ in range(50):
            f = random_word(rng, rng.randint(1, 6))
            g = random_word(rng, rng.randint(1, 6))
            tree_route = pl_breakpoints(compose(f, g))
            pl_route = compose_pl(pl_breakpoints(f), pl_breakpoints(g))
            assert pl_equal(tree_route, pl_route)

    def test_associativity_via_oracle(self):
        rng = random.Random(23)
        for _ in range(50):
            f, g, h = (random_word(rng, rng.randint(1, 6)) for _ in range(3))
            assert compose(compose(f, g), h) == compose(f, compose(g, h))


class TestGenerators:
    def test_literals(self):
        assert str(generator(0)) == "((1 1) 1) -> (1 (1 1))"
        assert str(generator(1)) == "(1 ((1 1) 1)) -> (1 (1 (1 1)))"

    def test_conjugate_shape(self):
        # each next generator acts one level deeper along the right spine
        assert str(generator(2)) == "(1 (1 ((1 1) 1))) -> (1 (1 (1 (1 1))))"
        assert str(generator(3)) == "(1 (1 (1 ((1 1) 1)))) -> (1 (1 (1 (1 (1 1)))))"

    def test_conjugation_matches_oracle(self):
        x0, x1 = generator(0), generator(1)
        conj = compose(x0, compose(x1, invert(x0)))
        assert pl_equal(pl_breakpoints(conj), pl_breakpoints(generator(2)))

    def test_cap(self):
        with pytest.raises(ValueError):
            generator(20, cap=8)
        with pytest.raises(ValueError):
            generator(-1)


class TestPartialAction:
    def test_x0_reassociates(self):
        image = partial_apply(generator(0), parse_tree("((1 1) 1)"))
        assert image == parse_tree("(1 (1 1))")

    def test_x0_undefined_on_coarse_tree(self):
        assert partial_apply(generator(0), parse_tree("(1 1)")) is None

    def test_x1_example(self):
        image = partial_apply(generator(1), parse_tree("(1 ((1 1) 1))"))
        assert image == parse_tree("(1 (1 (1 1)))")

    def test_x0_law_all_instances(self):
        # total size <= 8
        pool = trees_upto(6)
        for a in pool:
            for b in pool:
                if a.size + b.size >= 8:
                    continue
                for c in trees_upto(8 - a.size - b.size):
                    lhs = partial_apply(generator(0), caret(caret(a, b), c))
                    assert lhs == caret(a, caret(b, c))

    def test_x1_law_all_instances(self):
        pool = trees_upto(5)
        x1 = generator(1)
        for s in pool:
            for a in pool:
                for b in pool:
                    rest = 8 - s.size - a.size - b.size
                    if rest < 1:
                        continue
                    for c in trees_upto(rest):
                        lhs = partial_apply(x1, caret(s, caret(caret(a, b), c)))
                        assert lhs == caret(s, caret(a, caret(b, c)))

    def test_action_compatibility(self):
        rng = random.Random(31)
        pool = trees_upto(8)
        hits = 0
        for _ in range(400):
            f = random_word(rng, rng.randint(1, 4))
            g = random_word(rng, rng.randint(1, 4))
            t = rng.choice(pool)
            inner = partial_apply(g, t)
            if inner is None:
                continue
            outer = partial_apply(f, inner)
            if outer is None:
                continue
            hits += 1
            assert partial_apply(compose(f, g), t) == outer
        assert hits > 20

    def test_image_is_pl_image_of_dyadic_set(self):
        rng = random.Random(37)
        pool = trees_upto(7)
        for _ in range(100):
            f = random_word(rng, rng.randint(1, 4))
            t = rng.choice(pool)
            image = partial_apply(f, t)
            if image is None:
                continue
            plmap = pl_breakpoints(f)
            assert dyadic_repr(image) == {
                eval_pl(plmap, x) for x in dyadic_repr(t)
            }


class TestInvarianceDefect:
    def test_point_mass_moves(self):
        mu = Measure.point(parse_tree("((1 1) 1)"))
        d = invariance_defect(mu, generator(0))
        assert d.undefined_mass == 0 and d.tv_defect == 1

    def test_partially_undefined(self):
        mu = make_measure(
            [(parse_tree("((1 1) 1)"), F(1, 2)), (parse_tree("(1 (1 1))"), F(1, 2))]
        )
        d = invariance_defect(mu, generator(0))
        assert d.undefined_mass == F(1, 2)
        assert d.tv_defect == F(1, 2)

    def test_identity_is_invariant(self):
        mu = make_measure([(t, F(1, 5)) for t in enumerate_trees(4)])
        d = invariance_defect(mu, identity_element())
        assert d.undefined_mass == 0 and d.tv_defect == 0


class TestReassociationIdentity:
    def test_triple_convolutions_differ_by_x0(self):
        rng = random.Random(41)
        pool = trees_upto(3)

        def rand_measure():
            support = rng.sample(pool, 2)
            a = F(rng.randint(1, 5), 6)
            return make_measure([(support[0], a), (support[1], 1 - a)])

        x0 = generator(0)
        for _ in range(100):
            mu, nu, xi = rand_measure(), rand_measure(), rand_measure()
            left = convolve(CARET_SYSTEM, convolve(CARET_SYSTEM, mu, nu), xi)
            right = convolve(CARET_SYSTEM, mu, convolve(CARET_SYSTEM, nu, xi))
            assert pushforward(lambda t: partial_apply(x0, t), left) == right
            for w, weight in left.items():
                assert right.weight(partial_apply(x0, w)) == weight


class TestSerialization:
    def test_roundtrip(self):
        for k in range(4):
            f = generator(k)
            assert parse_felement(format_felement(f)) == f

    def test_parse_reduces(self):
        f = parse_felement("((1 1) (1 1)) -> (1 (1 (1 1)))")
        assert f == generator(0)

    def test_bad_text(self):
        with pytest.raises(ValueError):
            parse_felement("((1 1) 1)")
