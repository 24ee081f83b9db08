"""
Unit tests for the J-function, a-priori generation and the MI estimator.
"""

import numpy as np
import pytest

from jointsdr.harness.exit import MIN_MI_SAMPLES, gen_apriori, j_function, j_inverse, measure_mi


class TestJFunction:
    """Test J and its inverse."""

    @pytest.mark.parametrize("sigma, expected", [(1.0, 0.1608), (2.0, 0.486), (3.0, 0.7599)])
    def test_reference_values(self, sigma, expected):
        """Test against the usual closed-form approximation."""
        assert j_function(sigma) == pytest.approx(expected, abs=0.01)

    def test_limits(self):
        """J(0) = 0 and J is increasing towards 1."""
        values = [j_function(s) for s in (0.0, 0.5, 2.0, 8.0, 20.0)]
        assert values[0] == 0.0
        assert all(a < b for a, b in zip(values, values[1:]))
        assert values[-1] == pytest.approx(1.0, abs=1e-6)

    def test_negative_sigma(self):
        """Test invalid sigma."""
        with pytest.raises(ValueError):
            j_function(-0.1)

    @pytest.mark.parametrize("mi", [0.05, 0.3, 0.5, 0.9, 0.99])
    def test_inverse(self, mi):
        """Test J(J^-1(I)) = I."""
        assert j_function(j_inverse(mi)) == pytest.approx(mi, abs=1e-5)

    def test_inverse_range(self):
        """Test I_A must lie in [0, 1)."""
        assert j_inverse(0.0) == 0.0
        with pytest.raises(ValueError):
            j_inverse(1.0)
        with pytest.raises(ValueError):
            j_inverse(-0.1)


class TestApriori:
    """Test consistent Gaussian a-priori LLRs."""

    def test_consistent_statistics(self, rng):
        """Mean sigma^2/2 times the bit, variance sigma^2."""
        bits = np.where(rng.random(100_000) < 0.5, 1.0, -1.0)
        llrs = gen_apriori(0.5, bits, rng)
        sigma = j_inverse(0.5)
        assert np.mean(llrs * bits) == pytest.approx(sigma ** 2 / 2.0, rel=0.02)
        assert np.var(llrs - (sigma ** 2 / 2.0) * bits) == pytest.approx(sigma ** 2, rel=0.02)

    def test_measured_information(self, rng):
        """Test the histogram estimate recovers the target I_A."""
        bits = np.where(rng.random(100_000) < 0.5, 1.0, -1.0)
        assert measure_mi(gen_apriori(0.5, bits, rng), bits) == pytest.approx(0.5, abs=0.02)

    def test_zero_information(self, rng):
        """Test I_A = 0 yields all-zero LLRs."""
        np.testing.assert_array_equal(gen_apriori(0.0, np.ones(5), rng), np.zeros(5))


class TestMeasureMi:
    """Test the conditional-histogram estimator."""

    def test_perfectly_reliable(self):
        """Test separated LLRs carry one bit."""
        bits = np.array([1.0, -1.0] * 500)
        assert measure_mi(10.0 * bits, bits) == pytest.approx(1.0)

    def test_constant_llrs(self):
        """Test a single LLR value carries nothing."""
        bits = np.array([1.0, -1.0] * 500)
        assert measure_mi(np.full(1000, 2.0), bits) == 0.0

    def test_one_class(self):
        """Test one-sided truth carries nothing."""
        assert measure_mi(np.linspace(1.0, 3.0, 1000), np.ones(1000)) == 0.0

    def test_uninformative(self, rng):
        """Test LLRs independent of the bits measure close to zero."""
        bits = np.where(rng.random(100_000) < 0.5, 1.0, -1.0)
        assert measure_mi(rng.standard_normal(100_000), bits) < 0.01

    def test_length_mismatch(self):
        """Test input validation."""
        with pytest.raises(ValueError, match="bits"):
            measure_mi(np.zeros(1000), np.ones(1001))

    def test_minimum_sample(self):
        """Test the estimator refuses samples below its minimum size."""
        bits = np.array([1.0, -1.0] * (MIN_MI_SAMPLES // 2))
        assert measure_mi(bits[:MIN_MI_SAMPLES], bits[:MIN_MI_SAMPLES]) == pytest.approx(1.0)
        with pytest.raises(ValueError, match="at least"):
            measure_mi(bits[:MIN_MI_SAMPLES - 1], bits[:MIN_MI_SAMPLES - 1])
