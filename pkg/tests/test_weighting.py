import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppxfuse import (
    DegenerateWeightsError,
    DomainError,
    PerplexityReport,
    SchemaError,
    WeightScheme,
    WeightVector,
    accuracy_weights,
    inverse_perplexity_weights,
    uniform_weights,
)


def report(name, p):
    return PerplexityReport(name, perplexity=p, n_examples=10, mean_nll=math.log(p))


class TestInversePerplexityWeights:
    def test_equal_perplexities_give_uniform(self):
        w = inverse_perplexity_weights([report(f"m{i}", 1.7) for i in range(4)])
        np.testing.assert_allclose(w.weights, 0.25, rtol=0, atol=1e-12)

    def test_single_model(self):
        w = inverse_perplexity_weights([report("m", 3.3)])
        assert w.weights.tolist() == [1.0]

    def test_exact_rational_case(self):
        w = inverse_perplexity_weights([report("a", 1.5), report("b", 2.0), report("c", 3.0)])
        expected = [4 / 7, 2 / 7, 1 / 7]
        assert np.abs(w.weights - expected).max() <= 1e-12
        assert w.scheme is WeightScheme.INVERSE_PERPLEXITY

    def test_perplexity_below_one_rejected(self):
        bad = PerplexityReport.__new__(PerplexityReport)
        object.__setattr__(bad, "model_name", "m")
        object.__setattr__(bad, "perplexity", 0.99)
        object.__setattr__(bad, "n_examples", 10)
        object.__setattr__(bad, "mean_nll", 0.0)
        with pytest.raises(DomainError):
            inverse_perplexity_weights([bad])

    def test_perfect_model_dominates_but_stays_finite(self):
        w = inverse_perplexity_weights([report("perfect", 1.0), report("other", 2.0)])
        assert np.isfinite(w.weights).all()
        assert w.weights[0] > 0.999999
        assert abs(w.weights.sum() - 1.0) <= 1e-12

    def test_order_reversal(self):
        rng = np.random.default_rng(21)
        for _ in range(200):
            ps = 1.0 + 10.0 ** rng.uniform(-6, 2, size=rng.integers(2, 6))
            w = inverse_perplexity_weights([report(f"m{i}", p) for i, p in enumerate(ps)])
            order = np.argsort(ps)
            sorted_weights = w.weights[order]
            # draws are continuous, so perplexities are distinct: strict reversal
            assert (np.diff(sorted_weights) < 0).all()

    def test_permutation_equivariance(self):
        ps = [1.2, 1.9, 4.0, 1.05]
        reports = [report(f"m{i}", p) for i, p in enumerate(ps)]
        w = inverse_perplexity_weights(reports)
        perm = [2, 0, 3, 1]
        w_perm = inverse_perplexity_weights([reports[i] for i in perm])
        np.testing.assert_array_equal(w_perm.weights, w.weights[perm])
        assert w_perm.model_names == tuple(f"m{i}" for i in perm)

    def test_scaling_adjusted_inverses_is_invariant(self):
        # scale (P - 1) by a power of two: normalization must cancel it exactly
        base = [1.25, 1.5, 3.0]
        scaled = [1.0 + 4.0 * (p - 1.0) for p in base]
        w1 = inverse_perplexity_weights([report(f"m{i}", p) for i, p in enumerate(base)])
        w2 = inverse_perplexity_weights([report(f"m{i}", p) for i, p in enumerate(scaled)])
        np.testing.assert_array_equal(w1.weights, w2.weights)

    def test_empty_rejected(self):
        with pytest.raises(DomainError):
            inverse_perplexity_weights([])


class TestAccuracyWeights:
    def test_symmetry(self):
        w = accuracy_weights([("a", 0.5), ("b", 0.5)])
        assert w.weights.tolist() == [0.5, 0.5]
        assert w.scheme is WeightScheme.ACCURACY

    def test_exact_rational_case(self):
        w = accuracy_weights([("a", 0.9), ("b", 0.6), ("c", 0.3)])
        expected = [0.5, 1 / 3, 1 / 6]
        assert np.abs(w.weights - expected).max() <= 1e-12

    def test_single_model(self):
        w = accuracy_weights([("a", 0.7)])
        assert w.weights.tolist() == [1.0]

    def test_all_zero_is_degenerate(self):
        with pytest.raises(DegenerateWeightsError):
            accuracy_weights([("a", 0.0), ("b", 0.0)])

    def test_out_of_range_rejected(self):
        with pytest.raises(DomainError):
            accuracy_weights([("a", 1.2)])
        with pytest.raises(DomainError):
            accuracy_weights([("a", -0.1)])


class TestUniformWeights:
    def test_sum_and_value(self):
        for m in (1, 2, 3, 7, 100):
            w = uniform_weights([f"m{i}" for i in range(m)])
            assert abs(w.weights.sum() - 1.0) <= 1e-12
            np.testing.assert_allclose(w.weights, 1.0 / m, rtol=1e-15, atol=0)
            assert w.scheme is WeightScheme.UNIFORM


class TestWeightVectorInvariants:
    @given(
        st.lists(st.floats(min_value=1.0 + 1e-9, max_value=1e6), min_size=1, max_size=8)
    )
    @settings(max_examples=300, deadline=None)
    def test_normalization_invariant_holds_for_any_input(self, perplexities):
        w = inverse_perplexity_weights(
            [report(f"m{i}", p) for i, p in enumerate(perplexities)]
        )
        assert abs(float(w.weights.sum()) - 1.0) <= 1e-12
        assert (w.weights >= 0).all()

    def test_rejects_negative_weights(self):
        with pytest.raises(DomainError):
            WeightVector(("a", "b"), np.array([1.5, -0.5]), WeightScheme.UNIFORM)

    def test_rejects_bad_sum(self):
        with pytest.raises(DomainError):
            WeightVector(("a", "b"), np.array([0.7, 0.7]), WeightScheme.UNIFORM)

    def test_rejects_count_mismatch(self):
        with pytest.raises(SchemaError):
            WeightVector(("a",), np.array([0.5, 0.5]), WeightScheme.UNIFORM)

    def test_rejects_empty(self):
        with pytest.raises(SchemaError):
            WeightVector((), np.array([]), WeightScheme.UNIFORM)
