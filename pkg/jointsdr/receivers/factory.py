"""
Receiver factory.

Maps :class:`ReceiverType` values to configured receiver instances.
"""

from typing import Optional

from jointsdr.channel.mimo import BitIndexMap
from jointsdr.coding.ldpc import CodeDefinition
from jointsdr.core.config import ExperimentConfig, ReceiverType, TurboMode
from jointsdr.core.logging import get_logger
from jointsdr.receivers.base import BaseReceiver
from jointsdr.receivers.oracle import MlOracleReceiver
from jointsdr.receivers.sdr import SdrReceiver
from jointsdr.receivers.turbo import FullListTurboReceiver, TurboReceiver
from jointsdr.sdr.forms import CodeConstraints
from jointsdr.solvers.base import BaseConicSolver

logger = get_logger("receivers.factory")

_NEEDS_CONSTRAINTS = (ReceiverType.JOINT_ML_SDR, ReceiverType.TURBO_MULTI, ReceiverType.TURBO_SINGLE)


class ReceiverFactory:
    """Factory for creating receivers."""

    @staticmethod
    def needs_solver(receiver: ReceiverType) -> bool:
        return receiver not in (ReceiverType.FULL_LIST_TURBO, ReceiverType.ML_ORACLE)

    @staticmethod
    def needs_constraints(receiver: ReceiverType) -> bool:
        return receiver in _NEEDS_CONSTRAINTS

    @classmethod
    def create(
        cls,
        config: ExperimentConfig,
        code: CodeDefinition,
        bit_map: BitIndexMap,
        solver: Optional[BaseConicSolver] = None,
        constraints: Optional[CodeConstraints] = None,
    ) -> BaseReceiver:
        """
        Create the receiver selected by ``config.receiver``.

        Args:
            config: Experiment configuration
            code: LDPC code
            bit_map: Codeword-to-snapshot layout
            solver: Conic solver, required by SDR-based receivers
            constraints: Pre-enumerated FS inequalities, shared across receivers

        Raises:
            ValueError: If an SDR-based receiver is requested without a solver
        """
        kind = config.receiver
        if cls.needs_solver(kind) and solver is None:
            raise ValueError(f"receiver {kind.value} needs a conic solver")
        if cls.needs_constraints(kind) and constraints is None:
            constraints = CodeConstraints.from_code(code, config.code.fs_degree_cap)

        logger.debug("Creating receiver", receiver=kind.value)
        if kind == ReceiverType.DISJOINT_ML_SDR:
            return SdrReceiver(code, bit_map, config, solver, joint=False)
        if kind == ReceiverType.JOINT_ML_SDR:
            return SdrReceiver(code, bit_map, config, solver, joint=True, constraints=constraints)
        if kind == ReceiverType.TURBO_MULTI:
            return TurboReceiver(code, bit_map, config, solver, TurboMode.MULTI, constraints)
        if kind == ReceiverType.TURBO_SINGLE:
            return TurboReceiver(code, bit_map, config, solver, TurboMode.SINGLE, constraints)
        if kind == ReceiverType.FULL_LIST_TURBO:
            return FullListTurboReceiver(code, bit_map, config)
        return MlOracleReceiver(code, bit_map, config)
