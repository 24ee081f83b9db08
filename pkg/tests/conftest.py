"""
Shared fixtures: small codes, seeded generators and a tight solver.
"""

import numpy as np
import pytest

from jointsdr.channel.mimo import BitIndexMap
from jointsdr.coding.ldpc import hamming_7_4
from jointsdr.core.config import CodeConfig, ExperimentConfig, Settings, SolverConfig
from jointsdr.harness.runner import build_code
from jointsdr.sdr.forms import CodeConstraints
from jointsdr.solvers.interior_point import InteriorPointSolver

SMALL_CODE = CodeConfig(nc=32, kc=16, col_weight=3, seed=11)


@pytest.fixture
def rng():
    """Seeded generator."""
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def hamming():
    """(7,4) Hamming code."""
    return hamming_7_4()


@pytest.fixture(scope="session")
def small_code():
    """Seeded (32,16) column-weight-3 code."""
    return build_code(SMALL_CODE)


@pytest.fixture(scope="session")
def small_constraints(small_code):
    """FS inequalities of the small code."""
    return CodeConstraints.from_code(small_code)


@pytest.fixture
def small_map(small_code):
    """Nt = 2 layout of the small code (K = 8)."""
    return BitIndexMap.for_codeword(small_code.nc, 2)


@pytest.fixture
def solver():
    """Interior-point solver with tight tolerances."""
    return InteriorPointSolver(SolverConfig(gap_tol=1e-7, feas_tol=1e-8))


@pytest.fixture
def small_config():
    """Experiment on the small code with Nt = Nr = 2."""
    return ExperimentConfig(
        code=SMALL_CODE,
        nt=2,
        nr=2,
        snr_db=[10.0],
        max_codewords=4,
        max_bit_errors=1000,
        seed=5,
    )


@pytest.fixture
def settings():
    """Single-worker process settings."""
    return Settings(workers=1)
