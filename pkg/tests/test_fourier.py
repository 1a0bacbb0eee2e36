import json
import math

import numpy as np
import pytest

from conas.fourier import (
    FourierExpansion,
    Restriction,
    all_encodings,
    enumerate_parities,
    exact_transform,
    expansion_eval,
    fwht,
    merge_point,
    merge_points,
    parity_eval,
    parity_index,
    restrict_expansion,
    restrict_oracle,
)
from conas.oracles import FunctionEvaluator, make_planted


def reference_eval(terms, alpha):
    # independent re-implementation: plain product-and-sum over the term map
    return sum(c * math.prod(int(alpha[i]) for i in s) for s, c in terms.items())


def pascal_binomial(n, k):
    row = [1]
    for _ in range(n):
        row = [1] + [row[i] + row[i + 1] for i in range(len(row) - 1)] + [1]
    return row[k]


class TestParityEval:
    def test_empty_set_is_plus_one(self):
        assert parity_eval((), np.array([1, -1, 1])) == 1.0

    def test_two_coordinates(self):
        assert parity_eval((0, 1), np.array([-1, 1, 1])) == -1.0
        assert parity_eval((0, 2), np.array([-1, 1, -1])) == 1.0

    def test_out_of_range_names_index(self):
        with pytest.raises(ValueError, match="coordinate 3"):
            parity_eval((3,), np.array([1, -1]))

    def test_bounded_on_the_whole_cube(self):
        X = all_encodings(6)
        for s in enumerate_parities(6, 6)[::7]:
            for row in X[::5]:
                assert abs(parity_eval(s, row)) == 1.0

    def test_bounded_exhaustively_up_to_n10(self):
        # every parity on every vertex, vectorized column by column
        for n in (4, 7, 10):
            X = all_encodings(n).astype(float)
            for s in enumerate_parities(n, n):
                column = np.prod(X[:, list(s)], axis=1) if s else np.ones(len(X))
                assert np.all(np.abs(column) == 1.0)


class TestExpansionEval:
    def test_constant(self):
        g = FourierExpansion(4, {(): 3.5})
        assert expansion_eval(g, np.array([1, 1, -1, 1])) == 3.5

    def test_two_terms(self):
        g = FourierExpansion(2, {(0,): 1.0, (0, 1): -2.0})
        assert expansion_eval(g, np.array([1, 1])) == -1.0

    def test_matches_independent_reimplementation(self):
        rng = np.random.default_rng(7)
        g = make_planted(9, 5, 3, seed=13).expansion
        for _ in range(50):
            alpha = rng.choice([-1, 1], size=9)
            assert expansion_eval(g, alpha) == pytest.approx(
                reference_eval(g.terms, alpha), abs=1e-12
            )

    def test_dimension_mismatch(self):
        g = FourierExpansion(3, {(0,): 1.0})
        with pytest.raises(ValueError):
            expansion_eval(g, np.array([1, 1]))

    def test_batch_agrees_with_scalar(self):
        g = make_planted(8, 6, 2, seed=3).expansion
        X = all_encodings(8)[:40]
        batch = g.evaluate_batch(X)
        for row, value in zip(X, batch):
            assert value == pytest.approx(g.evaluate(row), abs=1e-12)


class TestEnumerateParities:
    def test_small_case_is_exact(self):
        assert enumerate_parities(3, 1) == [(), (0,), (1,), (2,)]

    def test_length_is_binomial_sum(self):
        assert len(enumerate_parities(10, 2)) == 56

    def test_large_case_against_pascal(self):
        expected = 1 + pascal_binomial(140, 1) + pascal_binomial(140, 2)
        assert len(enumerate_parities(140, 2)) == expected == 9871

    def test_canonical_order(self):
        out = enumerate_parities(6, 3)
        keys = [(len(s), s) for s in out]
        assert keys == sorted(keys)
        assert len(set(out)) == len(out)
        for s in out:
            assert list(s) == sorted(s)

    def test_degree_over_dimension_rejected(self):
        with pytest.raises(ValueError):
            enumerate_parities(3, 4)


class TestFwht:
    def test_self_inverse_up_to_scale(self):
        rng = np.random.default_rng(0)
        v = rng.normal(size=32)
        assert np.allclose(fwht(fwht(v)), 32 * v, atol=1e-9)

    def test_non_power_of_two_rejected(self):
        with pytest.raises(ValueError):
            fwht(np.zeros(6))


class TestExactTransform:
    def test_single_coordinate(self):
        f = FunctionEvaluator(lambda a: float(a[0]), 2)
        assert dict(exact_transform(f, 2).terms) == {(0,): 1.0}

    def test_product_of_two(self):
        f = FunctionEvaluator(lambda a: float(a[0] * a[1]), 2)
        assert dict(exact_transform(f, 2).terms) == {(0, 1): 1.0}

    def test_planted_round_trip(self):
        plant = make_planted(10, 8, 3, seed=5)
        got = exact_transform(plant, 10)
        assert set(got.terms) == set(plant.expansion.terms)
        for s, c in plant.expansion.terms.items():
            assert got.terms[s] == pytest.approx(c, abs=1e-9)

    def test_cap_is_enforced(self):
        f = FunctionEvaluator(lambda a: 0.0, 17)
        with pytest.raises(ValueError, match="cap"):
            exact_transform(f, 17)

    def test_round_trip_reproduces_all_points(self):
        # n = 12: a random table function must be reproduced on every vertex
        rng = np.random.default_rng(42)
        table = rng.normal(size=1 << 12)
        X = all_encodings(12)

        def lookup(alpha):
            bits = (np.asarray(alpha) < 0).astype(np.int64)
            return table[int((bits << np.arange(12)).sum())]

        g = exact_transform(FunctionEvaluator(lookup, 12), 12)
        values = g.evaluate_batch(X)
        assert np.abs(values - table).max() < 1e-9


class TestOrthonormality:
    def test_exact_on_small_cube(self):
        X = all_encodings(4).astype(float)
        parities = enumerate_parities(4, 4)
        cols = {s: (np.prod(X[:, list(s)], axis=1) if s else np.ones(len(X))) for s in parities}
        for s in parities:
            for t in parities:
                inner = float((cols[s] * cols[t]).mean())
                assert inner == (1.0 if s == t else 0.0)

    def test_exact_on_sampled_pairs_n10(self):
        rng = np.random.default_rng(11)
        X = all_encodings(10).astype(float)
        parities = enumerate_parities(10, 10)
        for _ in range(100):
            s, t = (parities[int(k)] for k in rng.integers(len(parities), size=2))
            col_s = np.prod(X[:, list(s)], axis=1) if s else np.ones(len(X))
            col_t = np.prod(X[:, list(t)], axis=1) if t else np.ones(len(X))
            inner = float((col_s * col_t).mean())
            assert inner == (1.0 if s == t else 0.0)


class TestMergePoint:
    def test_fill_around_fixed(self):
        rho = Restriction(2, {1: 1})
        assert merge_point(np.array([-1]), rho).tolist() == [-1, 1]

    def test_empty_restriction_is_identity(self):
        rho = Restriction.empty(2)
        assert merge_point(np.array([-1, 1]), rho).tolist() == [-1, 1]

    def test_positional_fill(self):
        rho = Restriction(4, {0: -1, 3: 1})
        assert merge_point(np.array([1, -1]), rho).tolist() == [-1, 1, -1, 1]

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            merge_point(np.array([1, 1]), Restriction(2, {1: 1}))


class TestRestrictExpansion:
    def test_fix_to_plus_one(self):
        g = FourierExpansion(2, {(0, 1): 2.0})
        out = restrict_expansion(g, Restriction(2, {1: 1}))
        assert out.n == 1 and dict(out.terms) == {(0,): 2.0}

    def test_fix_to_minus_one(self):
        g = FourierExpansion(2, {(0, 1): 2.0})
        out = restrict_expansion(g, Restriction(2, {1: -1}))
        assert dict(out.terms) == {(0,): -2.0}

    def test_merge_and_evaluate_oracle(self):
        rng = np.random.default_rng(23)
        for trial in range(20):
            n = int(rng.integers(3, 9))
            g = make_planted(n, min(6, 2 ** n - 1), min(3, n), seed=trial).expansion
            fixed = {
                int(c): int(rng.choice([-1, 1]))
                for c in rng.choice(n, size=int(rng.integers(1, n)), replace=False)
            }
            rho = Restriction(n, fixed)
            restricted = restrict_expansion(g, rho)
            for _ in range(50):
                partial = rng.choice([-1, 1], size=len(rho.free))
                expected = g.evaluate(merge_point(partial, rho))
                assert restricted.evaluate(partial) == pytest.approx(expected, abs=1e-9)

    def test_never_increases_degree(self):
        rng = np.random.default_rng(2)
        for trial in range(20):
            g = make_planted(8, 6, 3, seed=100 + trial).expansion
            fixed = {int(c): int(rng.choice([-1, 1])) for c in rng.choice(8, size=3, replace=False)}
            out = restrict_expansion(g, Restriction(8, fixed))
            assert out.degree() <= g.degree()

    def test_collisions_are_summed(self):
        g = FourierExpansion(2, {(0,): 1.0, (0, 1): 2.0})
        out = restrict_expansion(g, Restriction(2, {1: 1}))
        assert dict(out.terms) == {(0,): 3.0}
        cancel = restrict_expansion(FourierExpansion(2, {(0,): 1.0, (0, 1): -1.0}), Restriction(2, {1: 1}))
        assert dict(cancel.terms) == {}


def bit_sum_evaluator(n):
    return FunctionEvaluator(lambda a: float(np.sum(a)), n)


class TestRestrictOracle:
    def test_sum_of_bits(self):
        f = bit_sum_evaluator(3)
        restricted = restrict_oracle(f, Restriction(3, {2: 1}))
        assert restricted.n == 2
        assert restricted.evaluate(np.array([-1, -1])) == -1.0

    def test_identity_restriction(self):
        f = bit_sum_evaluator(3)
        restricted = restrict_oracle(f, Restriction.empty(3))
        for row in all_encodings(3):
            assert restricted.evaluate(row) == f.evaluate(row)

    def test_composition_equals_combined(self):
        f = bit_sum_evaluator(4)
        once = restrict_oracle(f, Restriction(4, {0: 1}))
        # original coordinate 1 is coordinate 0 of the reduced function
        twice = restrict_oracle(once, Restriction(3, {0: -1}))
        combined = restrict_oracle(f, Restriction(4, {0: 1, 1: -1}))
        assert twice.n == combined.n == 2
        for row in all_encodings(2):
            assert twice.evaluate(row) == combined.evaluate(row)

    def test_overlapping_composition_rejected(self):
        with pytest.raises(ValueError, match="overlapping"):
            Restriction(4, {0: 1}).compose(Restriction(4, {0: -1}))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            restrict_oracle(bit_sum_evaluator(3), Restriction(4, {0: 1}))


class TestTransformRestrictionCommute:
    def test_commutes_term_by_term(self):
        rng = np.random.default_rng(31)
        for trial in range(10):
            n = int(rng.integers(4, 9))
            plant = make_planted(n, 6, min(3, n), seed=trial + 50)
            fixed = {
                int(c): int(rng.choice([-1, 1]))
                for c in rng.choice(n, size=int(rng.integers(1, n - 1)), replace=False)
            }
            rho = Restriction(n, fixed)
            via_oracle = exact_transform(restrict_oracle(plant, rho), len(rho.free))
            via_expansion = restrict_expansion(exact_transform(plant, n), rho)
            assert set(via_oracle.terms) == set(via_expansion.terms)
            for s, c in via_expansion.terms.items():
                assert via_oracle.terms[s] == pytest.approx(c, abs=1e-9)


class TestFourierExpansionType:
    def test_zero_terms_dropped_and_duplicates_summed(self):
        g = FourierExpansion(3, {(0,): 0.0, (1, 0): 1.0, (0, 1): 2.0})
        assert dict(g.terms) == {(0, 1): 3.0}

    def test_index_out_of_range(self):
        with pytest.raises(ValueError):
            FourierExpansion(2, {(2,): 1.0})

    def test_duplicate_coordinate_rejected(self):
        with pytest.raises(ValueError):
            parity_index((0, 0))

    def test_json_round_trip_in_canonical_order(self):
        g = FourierExpansion(4, {(1, 3): -2.0, (0,): 1.5, (): 4.0})
        payload = g.to_json_dict()
        assert [t["s"] for t in payload["terms"]] == [[], [0], [1, 3]]
        back = FourierExpansion.from_json_dict(json.loads(json.dumps(payload)))
        assert back == g

    def test_merge_points_matches_scalar(self):
        rho = Restriction(5, {1: -1, 4: 1})
        X = all_encodings(3)
        merged = merge_points(X, rho)
        for row, full in zip(X, merged):
            assert full.tolist() == merge_point(row, rho).tolist()
