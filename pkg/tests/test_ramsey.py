import itertools
import math
import random
from fractions import Fraction as F

import pytest

from caretlab.ramsey import (
    Coloring,
    Embedding,
    EmbeddingCopy,
    adversarial_coloring_search,
    check_oscillation_certificate,
    compositions,
    constant_copy_exists,
    copy_values,
    enumerate_embeddings,
    exhaustive_strong_min,
    load_coloring,
    min_oscillation_copy,
    save_coloring,
    scan_minimal_n,
    strong_copy_search,
    strong_gap_coloring,
)
from caretlab.trees import enumerate_trees, format_tree, parse_tree


def catalan(k):
    return math.comb(2 * k, k) // (k + 1)


def oracle_min_oscillation(coloring, embeddings, sources):
    """Vertex enumeration of the arrangement, for up to 3 embeddings.

    The oscillation is piecewise linear and convex in the simplex weights,
    so its minimum is attained at a vertex of the arrangement cut out by
    the value-crossing lines and the simplex facets.
    """
    values = [[coloring[e.apply(t)] for e in embeddings] for t in sources]

    def osc(lam):
        per_tree = [
            sum((l * v for l, v in zip(lam, row)), F(0)) for row in values
        ]
        return max(per_tree) - min(per_tree)

    e = len(embeddings)
    if e == 1:
        return osc([F(1)])
    if e == 2:
        candidates = {F(0), F(1)}
        for r1, r2 in itertools.combinations(values, 2):
            den = (r1[0] - r1[1]) - (r2[0] - r2[1])
            if den != 0:
                x = (r2[1] - r1[1]) / den
                if 0 <= x <= 1:
                    candidates.add(x)
        return min(osc([x, 1 - x]) for x in candidates)
    if e == 3:
        # lines a.l = 0 over (l1, l2), l3 = 1 - l1 - l2
        lines = []
        for r1, r2 in itertools.combinations(values, 2):
            d = [a - b for a, b in zip(r1, r2)]
            lines.append((d[0] - d[2], d[1] - d[2], d[2]))  # c1 l1 + c2 l2 + c0 = 0
        lines.append((F(1), F(0), F(0)))  # l1 = 0
        lines.append((F(0), F(1), F(0)))  # l2 = 0
        lines.append((F(-1), F(-1), F(1)))  # l3 = 0
        candidates = set()
        for (a1, b1, c1), (a2, b2, c2) in itertools.combinations(lines, 2):
            det = a1 * b2 - a2 * b1
            if det == 0:
                continue
            l1 = (-c1 * b2 + c2 * b1) / det
            l2 = (-a1 * c2 + a2 * c1) / det
            l3 = 1 - l1 - l2
            if l1 >= 0 and l2 >= 0 and l3 >= 0:
                candidates.add((l1, l2, l3))
        candidates.update(
            [(F(1), F(0), F(0)), (F(0), F(1), F(0)), (F(0), F(0), F(1))]
        )
        return min(osc(list(lam)) for lam in candidates)
    raise ValueError("oracle handles at most 3 embeddings")


class TestEmbeddings:
    def test_two_into_three(self):
        embs = enumerate_embeddings(2, 3)
        assert [tuple(map(format_tree, e.parts)) for e in embs] == [
            ("1", "(1 1)"),
            ("(1 1)", "1"),
        ]

    def test_three_into_four(self):
        assert len(enumerate_embeddings(3, 4)) == 3

    def test_one_slot(self):
        for n in range(1, 7):
            assert len(enumerate_embeddings(1, n)) == catalan(n - 1)

    def test_count_formula(self):
        for m in range(1, 5):
            for n in range(m, 8):
                expected = sum(
                    math.prod(catalan(p - 1) for p in parts)
                    for parts in compositions(n, m)
                )
                assert len(enumerate_embeddings(m, n)) == expected

    def test_images_land_in_target(self):
        for e in enumerate_embeddings(3, 6):
            for t in enumerate_trees(3):
                assert e.apply(t).size == 6

    def test_bad_sizes(self):
        with pytest.raises(ValueError):
            enumerate_embeddings(3, 2)


class TestColoring:
    def test_from_bits_roundtrip(self):
        for bits in range(32):
            c = Coloring.from_bits(4, bits)
            assert c.bits() == bits

    def test_missing_tree_rejected(self):
        trees = enumerate_trees(3)
        with pytest.raises(ValueError):
            Coloring(3, {trees[0]: F(1)})

    def test_out_of_range_rejected(self):
        trees = enumerate_trees(3)
        with pytest.raises(ValueError):
            Coloring(3, {trees[0]: F(2), trees[1]: F(0)})

    def test_file_roundtrip(self, tmp_path):
        c = Coloring(3, {t: F(i, 2) for i, t in enumerate(enumerate_trees(3))})
        path = tmp_path / "c.csv"
        save_coloring(path, c)
        assert load_coloring(path) == c


class TestCopyValues:
    def test_single_embedding_degenerate(self):
        e = enumerate_embeddings(3, 4)[0]
        copy = EmbeddingCopy((F(1),), (e,))
        c = Coloring.from_bits(4, 0b10101)
        cv = copy_values(copy, c)
        for t in enumerate_trees(3):
            assert cv.values[t] == c[e.apply(t)]

    def test_singleton_source_zero_oscillation(self):
        for e in enumerate_embeddings(2, 5)[:4]:
            copy = EmbeddingCopy((F(1),), (e,))
            c = Coloring.from_bits(5, 0b10110101010101)
            assert copy_values(copy, c).oscillation == 0

    def test_uniform_three_embeddings(self):
        # indicator of the balanced size-4 tree averages to 1/3 on both sides
        embs = enumerate_embeddings(3, 4)
        copy = EmbeddingCopy((F(1, 3),) * 3, embs)
        target = parse_tree("((1 1) (1 1))")
        c = Coloring(4, {t: F(1 if t == target else 0) for t in enumerate_trees(4)})
        cv = copy_values(copy, c)
        assert set(cv.values.values()) == {F(1, 3)}
        assert cv.oscillation == 0


class TestMinOscillation:
    def test_singleton_source(self):
        for bits in range(8):
            res = min_oscillation_copy(Coloring.from_bits(3, bits), 2, 3)
            assert res.oscillation == 0

    def test_identity_instance(self):
        c = Coloring.from_bits(3, 0b01)
        res = min_oscillation_copy(c, 3, 3)
        assert res.oscillation == 1

    def test_three_four_always_constant(self):
        for bits in range(32):
            res = min_oscillation_copy(Coloring.from_bits(4, bits), 3, 4)
            assert res.oscillation == 0

    def test_matches_oracle_small_instances(self):
        sources = enumerate_trees(3)
        embs33 = enumerate_embeddings(3, 3)
        embs34 = enumerate_embeddings(3, 4)
        for bits in range(4):
            c = Coloring.from_bits(3, bits)
            assert min_oscillation_copy(c, 3, 3).oscillation == oracle_min_oscillation(
                c, embs33, sources
            )
        for bits in range(32):
            c = Coloring.from_bits(4, bits)
            assert min_oscillation_copy(c, 3, 4).oscillation == oracle_min_oscillation(
                c, embs34, sources
            )

    def test_rational_colorings_match_oracle(self):
        rng = random.Random(12)
        sources = enumerate_trees(3)
        embs = enumerate_embeddings(3, 4)
        for _ in range(20):
            c = Coloring(
                4, {t: F(rng.randint(0, 6), 6) for t in enumerate_trees(4)}
            )
            assert min_oscillation_copy(c, 3, 4).oscillation == oracle_min_oscillation(
                c, embs, sources
            )

    def test_monotone_in_embedding_set(self):
        # the full LP can only do better than any 1- or 2-column restriction
        rng = random.Random(3)
        sources = enumerate_trees(3)
        embs = enumerate_embeddings(3, 5)
        for _ in range(10):
            c = Coloring(
                5, {t: F(rng.randint(0, 4), 4) for t in enumerate_trees(5)}
            )
            full = min_oscillation_copy(c, 3, 5).oscillation
            for _ in range(5):
                subset = rng.sample(embs, 2)
                assert full <= oracle_min_oscillation(c, subset, sources)

    def test_certificate_checks(self):
        c = Coloring.from_bits(3, 0b01)
        res = min_oscillation_copy(c, 3, 3)
        assert check_oscillation_certificate(c, 3, 3, res.certificate)
        assert res.certificate.bound == res.oscillation


class TestConstantCopy:
    def test_constant_coloring(self):
        c = Coloring.from_bits(4, 0)
        outcome = constant_copy_exists(c, 3, 4)
        assert outcome.exists

    def test_separating_coloring_fails(self):
        c = Coloring.from_bits(3, 0b10)
        outcome = constant_copy_exists(c, 3, 3)
        assert not outcome.exists
        assert outcome.certificate.bound == 1
        assert check_oscillation_certificate(c, 3, 3, outcome.certificate)

    def test_all_32_colorings_at_three_four(self):
        for bits in range(32):
            outcome = constant_copy_exists(Coloring.from_bits(4, bits), 3, 4)
            assert outcome.exists
            values = copy_values(outcome.copy, Coloring.from_bits(4, bits))
            assert values.oscillation == 0

    def test_agreement_with_min_oscillation(self):
        for (m, n) in [(3, 3), (3, 4)]:
            count = len(enumerate_trees(n))
            for bits in range(1 << count):
                c = Coloring.from_bits(n, bits)
                assert constant_copy_exists(c, m, n).exists == (
                    min_oscillation_copy(c, m, n).oscillation == 0
                )

    def test_needs_binary(self):
        c = Coloring(3, {t: F(1, 2) for t in enumerate_trees(3)})
        with pytest.raises(ValueError):
            constant_copy_exists(c, 3, 3)


class TestAdversary:
    def test_finds_identity_witness(self):
        witness = adversarial_coloring_search(3, 3, F(0), budget=50, seed=4)
        assert witness is not None
        assert min_oscillation_copy(witness, 3, 3).oscillation == 1

    def test_none_at_three_four(self):
        assert adversarial_coloring_search(3, 4, F(0), budget=40, seed=4) is None

    def test_none_for_singleton_source(self):
        assert adversarial_coloring_search(2, 4, F(0), budget=30, seed=1) is None

    def test_seed_determinism(self):
        a = adversarial_coloring_search(3, 3, F(0), budget=50, seed=9)
        b = adversarial_coloring_search(3, 3, F(0), budget=50, seed=9)
        assert a == b


class TestScan:
    def test_singleton_source_suffices_immediately(self):
        rows = scan_minimal_n(2, F(0), 3)
        assert rows[0].n == 2 and rows[0].verdict == "suffices"
        assert rows[0].certificate_kind == "exhaustive"

    def test_three_scan(self):
        rows = scan_minimal_n(3, F(0), 4)
        assert [(r.n, r.verdict) for r in rows] == [(3, "fails"), (4, "suffices")]
        assert rows[0].oscillation == 1
        assert rows[0].witness is not None
        assert rows[1].colorings_checked == 32

    def test_half_threshold(self):
        rows = scan_minimal_n(3, F(1, 2), 4)
        # a 0/1 coloring of the two size-3 trees still oscillates by 1
        assert rows[0].verdict == "fails"
        assert rows[1].verdict == "suffices"


class TestStrongCopies:
    def test_constant_coloring_immediate(self):
        c = Coloring.from_bits(4, 0b11111)
        res = strong_copy_search(c, 3, 4, budget=2, seed=0)
        assert res.oscillation == 0

    def test_singleton_source(self):
        c = Coloring.from_bits(4, 0b10010)
        res = strong_copy_search(c, 2, 4, budget=2, seed=0)
        assert res.oscillation == 0

    def test_gap_coloring_strong_side(self):
        gap = strong_gap_coloring()
        exact_min, parts, measures = exhaustive_strong_min(gap, 3, 4)
        assert exact_min == 1
        res = strong_copy_search(gap, 3, 4, budget=6, seed=2)
        assert res.oscillation == 1

    def test_gap_coloring_convex_side(self):
        gap = strong_gap_coloring()
        outcome = constant_copy_exists(gap, 3, 4)
        assert outcome.exists
        assert copy_values(outcome.copy, gap).oscillation == 0

    def test_strong_witness_expands_to_copy(self):
        # a strong copy, expanded over support products, is a plain copy
        c = Coloring.from_bits(5, 0b0011011001010)
        res = strong_copy_search(c, 2, 5, budget=4, seed=7)
        supports = [mu.items() for mu in res.measures]
        weights, embeddings = [], []
        for picks in itertools.product(*supports):
            weight = math.prod((w for _, w in picks), start=F(1))
            embeddings.append(Embedding(tuple(u for u, _ in picks)))
            weights.append(weight)
        copy = EmbeddingCopy(tuple(weights), tuple(embeddings))
        cv = copy_values(copy, c)
        assert cv.oscillation == res.oscillation

    def test_exhaustive_strong_requires_small_target(self):
        with pytest.raises(ValueError):
            exhaustive_strong_min(strong_gap_coloring(), 3, 6)
