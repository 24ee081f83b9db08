"""
Exception hierarchy for jointsdr.

Every error carries a human readable message and a short machine-readable
error code, which the harness uses as the ``error_type`` label when it counts
discarded trials.
"""

from typing import Optional


class JointSdrError(Exception):
    """Base exception for all jointsdr errors."""

    default_code = "jointsdr_error"

    def __init__(self, message: str, error_code: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.error_code = error_code or self.default_code


class DimensionError(JointSdrError, ValueError):
    """Array shapes or lengths are inconsistent."""

    default_code = "dimension_mismatch"


class CodeConstructionError(JointSdrError):
    """An LDPC code could not be built or parsed."""

    default_code = "code_construction"


class ConstraintLimitError(JointSdrError):
    """An enumeration would exceed its configured size guard."""

    default_code = "constraint_limit"


class ListRadiusError(JointSdrError, ValueError):
    """Hamming radius outside the valid range."""

    default_code = "list_radius"


class ConfigurationError(JointSdrError):
    """Invalid experiment configuration."""

    default_code = "configuration"


class SolverError(JointSdrError):
    """Base exception for conic solver failures."""

    default_code = "solver_error"


class SolverNumericalError(SolverError):
    """Factorization or step computation broke down."""

    default_code = "solver_numerical"


class SolverInfeasibleError(SolverError):
    """The solver detected primal or dual infeasibility."""

    default_code = "solver_infeasible"


class SolverUnavailableError(SolverError):
    """The requested solver back-end is not installed."""

    default_code = "solver_unavailable"


class ReceiverError(JointSdrError):
    """A receiver could not produce a decision for a codeword."""

    default_code = "receiver_error"
