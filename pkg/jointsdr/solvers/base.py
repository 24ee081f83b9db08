"""
Abstract base class for conic solvers.

This module defines the interface every solver back-end implements, so the
built-in interior-point engine and third-party solvers can be swapped behind
the receivers.
"""

import time
from abc import ABC, abstractmethod
from enum import Enum
from pathlib import Path
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from jointsdr.core.config import SolverConfig
from jointsdr.core.logging import LoggerMixin
from jointsdr.observability.metrics import SolveTimer
from jointsdr.sdr.forms import ConicProblem
from jointsdr.sdr.sdpa import write_sdpa

__all__ = ["BaseConicSolver", "ConicSolution", "SolverConfig", "SolverStatus"]


class SolverStatus(str, Enum):
    """Termination status of a solve."""
    OPTIMAL = "optimal"
    MAX_ITER = "max_iter"
    INFEASIBLE = "infeasible"


class ConicSolution(BaseModel):
    """Primal-dual state returned by a solver."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    X_blocks: np.ndarray
    f: np.ndarray
    y: Optional[np.ndarray] = None
    objective: float
    dual_objective: float
    status: SolverStatus
    gap: float = Field(description="Relative duality gap")
    primal_residual: float = Field(default=0.0, description="Relative equality residual")
    dual_residual: float = Field(default=0.0, description="Relative dual residual")
    iterations: int = 0
    solve_time_s: float = 0.0

    @property
    def optimal(self) -> bool:
        return self.status == SolverStatus.OPTIMAL

    def block(self, k: int) -> np.ndarray:
        return self.X_blocks[k]

    def min_eigenvalues(self) -> List[float]:
        return [float(np.linalg.eigvalsh(X)[0]) for X in self.X_blocks]


class BaseConicSolver(ABC, LoggerMixin):
    """Abstract base class for conic solvers."""

    def __init__(self, config: Optional[SolverConfig] = None, trace: bool = False):
        """Initialize the solver with its termination parameters."""
        self.config = config or SolverConfig()
        self.trace = trace
        # Written once, by the next solve
        self.dump_path: Optional[Path] = None

    @property
    @abstractmethod
    def name(self) -> str:
        """Solver name."""
        pass

    @abstractmethod
    def _solve(self, problem: ConicProblem) -> ConicSolution:
        """Back-end specific solve."""
        pass

    def solve(self, problem: ConicProblem) -> ConicSolution:
        """
        Solve a block-structured SDP.

        Args:
            problem: Assembled conic problem

        Returns:
            Solution with an honest status; best iterate when tolerances were not met

        Raises:
            SolverNumericalError: If the problem data is non-finite or the back-end fails
            SolverUnavailableError: If the back-end cannot be used
        """
        if self.dump_path is not None:
            write_sdpa(problem, self.dump_path)
            self.dump_path = None
        start = time.perf_counter()
        with SolveTimer(problem.kind.value) as timer:
            solution = self._solve(problem)
            solution.solve_time_s = time.perf_counter() - start
            timer.status = solution.status.value
            timer.iterations = solution.iterations

        self.logger.debug(
            "SDP solved",
            solver=self.name,
            form=problem.kind.value,
            status=solution.status.value,
            iterations=solution.iterations,
            objective=solution.objective,
            gap=solution.gap,
        )
        return solution
