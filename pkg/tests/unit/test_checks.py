"""
Unit tests for the exact property suites.
"""

import numpy as np

from jointsdr.core.errors import SolverNumericalError
from jointsdr.harness.checks import (
    check_list_equivalence,
    check_polytope,
    check_relaxation_bound,
    check_sdr_oracle,
)
from jointsdr.solvers.interior_point import InteriorPointSolver


class BrokenSolver(InteriorPointSolver):
    """Every solve breaks down."""

    @property
    def name(self) -> str:
        return "broken"

    def _solve(self, problem):
        raise SolverNumericalError("forced breakdown")


class TestOracleChecks:
    """Test the suites behind oracle-check."""

    def test_polytope_hamming(self):
        """Test FS feasibility matches parity on all 128 words."""
        result = check_polytope()
        assert result.passed
        assert result.instances == 128

    def test_list_equivalence(self):
        """Test the full-radius list reproduces the full-list extrinsics."""
        result = check_list_equivalence(np.random.default_rng(0), instances=10)
        assert result.passed

    def test_sdr_oracle_small(self, solver):
        """Test a short SDR-vs-ML run with its noiseless part."""
        result = check_sdr_oracle(solver, np.random.default_rng(1), instances=10, noiseless=5)
        assert result.instances == 15
        assert "noiseless failures 0" in result.detail

    def test_relaxation_bound_small(self, solver):
        """Test the joint optimum stays inside its bounds."""
        result = check_relaxation_bound(solver, np.random.default_rng(2), instances=2)
        assert result.passed

    def test_solver_failure_counts_as_failed_instance(self):
        """A solve that raises fails its instance and the suite still returns."""
        rng = np.random.default_rng(3)
        bound = check_relaxation_bound(BrokenSolver(), rng, instances=3)
        assert not bound.passed
        assert bound.failures == 3

        oracle = check_sdr_oracle(BrokenSolver(), rng, instances=4, noiseless=2)
        assert not oracle.passed
        assert oracle.failures == 6
