# jointsdr Package
"""
LDPC-coded MIMO detection with semidefinite relaxation.

The package builds disjoint, code-anchored (joint ML) and MAP semidefinite
relaxations of QPSK MIMO detection, solves them with a primal-dual
interior-point method and wraps them into one-shot and turbo receivers,
together with a Monte Carlo BER / EXIT harness.
"""

__version__ = "0.1.0"
__description__ = "LDPC-coded MIMO detection with joint semidefinite relaxation"

from jointsdr.core.config import ExperimentConfig, Settings

__all__ = ["ExperimentConfig", "Settings"]
