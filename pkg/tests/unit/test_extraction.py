"""
Unit tests for symbol retrieval from SDR blocks.
"""

import numpy as np
import pytest

from jointsdr.coding.ldpc import LlrFrame
from jointsdr.core.errors import DimensionError
from jointsdr.sdr.extraction import (
    LLR_DELTA,
    SoftSymbolVector,
    extract_direct,
    extract_randomized,
    extract_rank1,
    hard_decision,
    soft_to_llr,
)
from jointsdr.sdr.forms import assemble_disjoint, cost_matrix, lift_point


def _rank_one(x, t=1.0):
    z = np.append(x, t)
    return np.outer(z, z)


class TestDirect:
    """Test last-column extraction."""

    def test_rank_one_block(self):
        """Test the symbols of a rank-one block are read back."""
        x = np.array([1.0, -1.0, -1.0, 1.0])
        np.testing.assert_array_equal(extract_direct(_rank_one(x)).values, x)

    def test_even_side_rejected(self):
        """Test block shape validation."""
        with pytest.raises(DimensionError):
            extract_direct(np.eye(4))


class TestRank1:
    """Test dominant-eigenvector extraction."""

    def test_sign_fixed_by_last_entry(self):
        """A block lifted with t = -1 yields t*x."""
        x = np.array([1.0, 1.0, -1.0, 1.0])
        soft = extract_rank1(_rank_one(x, t=-1.0))
        assert not soft.fallback
        np.testing.assert_allclose(soft.values, -x, atol=1e-12)

    def test_matches_direct_on_rank_one(self):
        """Test both rules agree on rank-one blocks."""
        X, _ = lift_point(np.array([[1.0, -1.0, 1.0, -1.0]]))
        np.testing.assert_allclose(extract_rank1(X[0]).values, extract_direct(X[0]).values, atol=1e-12)

    def test_degenerate_falls_back(self):
        """Test coincident top eigenvalues fall back to the direct rule."""
        soft = extract_rank1(np.eye(5))
        assert soft.fallback
        np.testing.assert_array_equal(soft.values, np.zeros(4))

    @pytest.mark.parametrize("seed", range(5))
    def test_near_rank_one_agrees_with_direct(self, seed):
        """Quantized rank1 and direct values agree when the second eigenvalue is negligible."""
        rng = np.random.default_rng(seed)
        x = rng.choice([-1.0, 1.0], size=6)
        B = rng.standard_normal((7, 7))
        X = _rank_one(x) + 1e-8 * B @ B.T
        eigvals = np.linalg.eigvalsh(X)
        assert eigvals[-2] <= 1e-6 * eigvals[-1]
        np.testing.assert_array_equal(hard_decision(extract_rank1(X)), hard_decision(extract_direct(X)))

    def test_solved_blocks_agree(self, solver, rng):
        """Test both rules on the tight blocks of a noiseless solve."""
        costs = []
        for _ in range(4):
            H = rng.standard_normal((4, 4))
            costs.append(cost_matrix(H, H @ rng.choice([-1.0, 1.0], size=4)))
        solution = solver.solve(assemble_disjoint(costs))
        for k in range(len(costs)):
            block = solution.block(k)
            eigvals = np.linalg.eigvalsh(block)
            assert eigvals[-2] <= 1e-6 * eigvals[-1]
            np.testing.assert_array_equal(hard_decision(extract_rank1(block)), hard_decision(extract_direct(block)))


class TestRandomized:
    """Test Gaussian randomization."""

    def test_rank_one_block(self, rng):
        """Every sample of a rank-one block quantizes to the lifted symbols."""
        x = np.array([1.0, -1.0, 1.0, 1.0])
        H = rng.standard_normal((4, 4))
        best = extract_randomized(_rank_one(x), cost_matrix(H, H @ x), 10, rng)
        np.testing.assert_array_equal(best, x)

    def test_seeded(self, rng):
        """Hard symbols, reproducible for a seeded generator."""
        H = rng.standard_normal((4, 4))
        y = H @ np.array([1.0, 1.0, -1.0, -1.0]) + 0.8 * rng.standard_normal(4)
        cost = cost_matrix(H, y)
        A = rng.standard_normal((5, 5))
        X = A @ A.T
        d = np.sqrt(np.diag(X))
        X = X / np.outer(d, d)
        first = extract_randomized(X, cost, 50, np.random.default_rng(9))
        second = extract_randomized(X, cost, 50, np.random.default_rng(9))
        assert set(np.unique(first)) <= {-1.0, 1.0}
        np.testing.assert_array_equal(first, second)

    def test_validation(self, rng):
        """Test trial count and size checks."""
        cost = cost_matrix(np.eye(2), np.ones(2))
        with pytest.raises(ValueError):
            extract_randomized(np.eye(3), cost, 0, rng)
        with pytest.raises(DimensionError):
            extract_randomized(np.eye(5), cost, 5, rng)


class TestDecisions:
    """Test hard decisions and the soft-to-LLR map."""

    def test_zero_maps_to_plus_one(self):
        """Test sign convention."""
        np.testing.assert_array_equal(hard_decision(np.array([0.0, -0.2, 0.3])), [1.0, -1.0, 1.0])
        np.testing.assert_array_equal(hard_decision(LlrFrame(np.array([-1.0, 0.0]))), [-1.0, 1.0])

    def test_non_finite(self):
        """Test NaN input."""
        with pytest.raises(ValueError):
            hard_decision(np.array([np.nan]))

    def test_llr_mapping(self):
        """2 atanh(v), clamped at +-(1 - delta) and clipped."""
        llr = soft_to_llr(SoftSymbolVector(np.array([0.0, 0.5, 1.0, -1.0])), clip=30.0)
        assert llr[0] == 0.0
        assert llr[1] == pytest.approx(2.0 * np.arctanh(0.5))
        assert llr[2] == pytest.approx(2.0 * np.arctanh(1.0 - LLR_DELTA))
        assert llr[3] == -llr[2]

    def test_llr_clip(self):
        """Test the default clip bound."""
        np.testing.assert_array_equal(soft_to_llr(np.array([0.9999, -2.0])), [8.0, -8.0])
