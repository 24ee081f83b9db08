"""
Solver factory.

This module maps :class:`SolverBackend` values to solver classes, enabling
back-end selection by name and registration of custom solvers.
"""

from typing import Dict, Optional, Type, Union

from jointsdr.core.config import SolverBackend, SolverConfig
from jointsdr.core.logging import get_logger
from jointsdr.solvers.base import BaseConicSolver
from jointsdr.solvers.cvxpy_solver import CvxpySolver
from jointsdr.solvers.interior_point import InteriorPointSolver

logger = get_logger("solvers.factory")


class SolverFactory:
    """Factory for creating conic solvers."""

    _solvers: Dict[str, Type[BaseConicSolver]] = {
        SolverBackend.INTERIOR_POINT.value: InteriorPointSolver,
        SolverBackend.CVXPY.value: CvxpySolver,
    }

    @classmethod
    def create_solver(
        cls,
        backend: Union[SolverBackend, str],
        config: Optional[SolverConfig] = None,
        trace: bool = False,
    ) -> BaseConicSolver:
        """
        Create a solver instance.

        Args:
            backend: Back-end identifier
            config: Termination parameters
            trace: Log one event per solver iteration

        Raises:
            ValueError: If the back-end is not registered
        """
        key = backend.value if isinstance(backend, SolverBackend) else str(backend)
        if key not in cls._solvers:
            raise ValueError(f"Unsupported solver back-end: {key}")

        solver_class = cls._solvers[key]
        logger.debug("Creating solver", backend=key, solver_class=solver_class.__name__)
        return solver_class(config, trace)

    @classmethod
    def register_solver(cls, backend: str, solver_class: type) -> None:
        """
        Register a custom solver.

        Args:
            backend: Back-end identifier
            solver_class: Solver class
        """
        if not issubclass(solver_class, BaseConicSolver):
            raise ValueError("Solver class must inherit from BaseConicSolver")

        cls._solvers[backend] = solver_class
        logger.info("Custom solver registered", backend=backend, solver_class=solver_class.__name__)

    @classmethod
    def available(cls) -> list:
        return sorted(cls._solvers)
