"""
Iterative detection and decoding.

Each turbo iteration runs one detector pass producing extrinsic LLRs
``L_E1`` from Hamming-radius candidate lists, then one SPA pass whose
extrinsic output becomes the detector's a-priori input ``L_A1``. Decoding
stops as soon as the SPA hard decision satisfies every parity check.

Schedules:

* multi: every iteration solves the joint MAP-SDR with the current ``L_A1``
  (the first iteration, with ``L_A1 = 0``, is the joint ML-SDR) and centres
  the lists on the rounded solution.
* single: the SDP is solved once; later iterations centre the lists on the
  hard decision of ``L_E1_init + L_A1``.
* full list: no SDP, the list is the whole cube.
"""

import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from jointsdr.channel.mimo import BitIndexMap, RealBlockObservation
from jointsdr.coding.decoders import SpaResult, spa_decode
from jointsdr.coding.ldpc import CodeDefinition, LlrFrame
from jointsdr.core.config import ExperimentConfig, TurboConfig, TurboMode
from jointsdr.core.errors import ReceiverError, SolverError, SolverInfeasibleError
from jointsdr.core.logging import LoggerMixin, get_logger
from jointsdr.detection.lists import extrinsic_llr, full_list_detector, gen_list
from jointsdr.observability.metrics import record_error
from jointsdr.receivers.base import BaseReceiver, ReceiverOutput
from jointsdr.sdr.extraction import extract_direct, hard_decision
from jointsdr.sdr.forms import CodeConstraints, assemble_joint_map, cost_matrix
from jointsdr.solvers.base import BaseConicSolver, SolverStatus

logger = get_logger("receivers.turbo")


@dataclass(frozen=True)
class TurboIteration:
    """What one turbo iteration produced."""
    iteration: int
    extrinsic: LlrFrame
    feedback: LlrFrame
    hard: np.ndarray
    parity_ok: bool
    centers: Optional[np.ndarray]
    objective: Optional[float]
    solved: bool
    spa_iterations: int
    wall_time_s: float


@dataclass
class TurboTrace:
    """Per-iteration history of one codeword."""
    iterations: List[TurboIteration] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.iterations)

    def append(self, record: TurboIteration) -> None:
        self.iterations.append(record)

    @property
    def n_solves(self) -> int:
        return sum(record.solved for record in self.iterations)

    def to_output(self) -> ReceiverOutput:
        return ReceiverOutput(
            decisions=[r.hard for r in self.iterations],
            parity_ok=[r.parity_ok for r in self.iterations],
            objectives=[r.objective for r in self.iterations],
            n_solves=self.n_solves,
        )


def _noise_var(observations: Sequence[RealBlockObservation]) -> float:
    return float(observations[0].noise_var)


class JointMapSdrDetector(LoggerMixin):
    """Joint MAP-SDR solve followed by list-based max-log extrinsics."""

    def __init__(
        self,
        code: CodeDefinition,
        bit_map: BitIndexMap,
        solver: BaseConicSolver,
        turbo: TurboConfig,
        constraints: Optional[CodeConstraints] = None,
    ):
        self.code = code
        self.bit_map = bit_map
        self.solver = solver
        self.turbo = turbo
        self.constraints = constraints or CodeConstraints.from_code(code)

    def solve_centers(
        self,
        observations: Sequence[RealBlockObservation],
        priors: LlrFrame,
    ) -> Tuple[np.ndarray, float]:
        """
        Solve the joint MAP-SDR and round the direct extraction of every block.

        Returns:
            (K, 2Nt) +-1 list centres and the SDP objective
        """
        costs = [cost_matrix(o.H, o.y) for o in observations]
        problem = assemble_joint_map(
            costs, self.code, self.bit_map, priors, _noise_var(observations), self.constraints
        )
        solution = self.solver.solve(problem)
        if solution.status == SolverStatus.INFEASIBLE:
            raise SolverInfeasibleError("joint MAP-SDR problem reported infeasible")
        centers = np.stack([hard_decision(extract_direct(X)) for X in solution.X_blocks])
        return centers, solution.objective

    def extrinsics(
        self,
        observations: Sequence[RealBlockObservation],
        centers: np.ndarray,
        priors: LlrFrame,
    ) -> LlrFrame:
        """Clipped list extrinsics of every snapshot, in codeword order."""
        block_priors = self.bit_map.split(priors.values)
        noise_var = _noise_var(observations)
        rows = [
            extrinsic_llr(
                gen_list(centers[k], self.turbo.P), o.y, o.H, noise_var, block_priors[k], self.turbo.clip
            )
            for k, o in enumerate(observations)
        ]
        return LlrFrame(self.bit_map.merge(np.stack(rows)))

    def detect(self, observations: Sequence[RealBlockObservation], priors: LlrFrame) -> LlrFrame:
        """One full detector pass."""
        centers, _ = self.solve_centers(observations, priors)
        return self.extrinsics(observations, centers, priors)


class FullListDetector:
    """Max-log extrinsics over the whole +-1 cube of every snapshot."""

    def __init__(self, bit_map: BitIndexMap, turbo: TurboConfig):
        self.bit_map = bit_map
        self.turbo = turbo

    def detect(self, observations: Sequence[RealBlockObservation], priors: LlrFrame) -> LlrFrame:
        block_priors = self.bit_map.split(priors.values)
        noise_var = _noise_var(observations)
        rows = [
            full_list_detector(o.y, o.H, noise_var, block_priors[k], self.turbo.clip)
            for k, o in enumerate(observations)
        ]
        return LlrFrame(self.bit_map.merge(np.stack(rows)))


def _decode(extrinsic: LlrFrame, code: CodeDefinition, cfg: TurboConfig) -> SpaResult:
    return spa_decode(extrinsic, code, cfg.spa_iters)


def _record(
    t: int,
    extrinsic: LlrFrame,
    result: SpaResult,
    centers: Optional[np.ndarray],
    objective: Optional[float],
    solved: bool,
    start: float,
) -> TurboIteration:
    return TurboIteration(
        iteration=t,
        extrinsic=extrinsic,
        feedback=result.extrinsic,
        hard=result.hard,
        parity_ok=result.parity_ok,
        centers=centers,
        objective=objective,
        solved=solved,
        spa_iterations=result.iterations,
        wall_time_s=time.perf_counter() - start,
    )


def turbo_multi(
    observations: Sequence[RealBlockObservation],
    detector: JointMapSdrDetector,
    cfg: TurboConfig,
) -> Tuple[np.ndarray, TurboTrace]:
    """
    Multi joint SDR receiver: one joint MAP-SDR solve per iteration.

    A solver failure after the first iteration reuses the previous centres;
    a failure in the first iteration aborts the codeword.

    Raises:
        ReceiverError: If the first solve fails
    """
    code = detector.code
    trace = TurboTrace()
    priors = LlrFrame.zeros(code.nc)
    centers: Optional[np.ndarray] = None
    result: Optional[SpaResult] = None

    for t in range(1, cfg.max_turbo_iters + 1):
        start = time.perf_counter()
        objective: Optional[float] = None
        solved = False
        try:
            centers, objective = detector.solve_centers(observations, priors)
            solved = True
        except SolverError as exc:
            record_error(exc.error_code, "turbo")
            if centers is None:
                raise ReceiverError(f"first joint MAP-SDR solve failed: {exc.message}") from exc
            logger.warning("Solver failed, reusing previous centres", iteration=t, error=exc.message)

        extrinsic = detector.extrinsics(observations, centers, priors)
        result = _decode(extrinsic, code, cfg)
        trace.append(_record(t, extrinsic, result, centers, objective, solved, start))
        priors = result.extrinsic
        if result.parity_ok:
            break

    return result.hard, trace


def turbo_single(
    observations: Sequence[RealBlockObservation],
    detector: JointMapSdrDetector,
    cfg: TurboConfig,
) -> Tuple[np.ndarray, TurboTrace]:
    """
    Single joint SDR receiver: one solve, then lists re-centred on ``L_E1_init + L_A1``.

    Raises:
        ReceiverError: If the solve fails
    """
    code, bit_map = detector.code, detector.bit_map
    trace = TurboTrace()
    priors = LlrFrame.zeros(code.nc)
    initial: Optional[LlrFrame] = None
    result: Optional[SpaResult] = None

    for t in range(1, cfg.max_turbo_iters + 1):
        start = time.perf_counter()
        objective: Optional[float] = None
        if initial is None:
            try:
                centers, objective = detector.solve_centers(observations, priors)
            except SolverError as exc:
                record_error(exc.error_code, "turbo")
                raise ReceiverError(f"joint MAP-SDR solve failed: {exc.message}") from exc
        else:
            centers = bit_map.split(hard_decision(initial + priors))

        extrinsic = detector.extrinsics(observations, centers, priors)
        if initial is None:
            initial = extrinsic
        result = _decode(extrinsic, code, cfg)
        trace.append(_record(t, extrinsic, result, centers, objective, t == 1, start))
        priors = result.extrinsic
        if result.parity_ok:
            break

    return result.hard, trace


def turbo_full_list(
    observations: Sequence[RealBlockObservation],
    detector: FullListDetector,
    code: CodeDefinition,
    cfg: TurboConfig,
) -> Tuple[np.ndarray, TurboTrace]:
    """Full-list turbo baseline, same schedule and early termination."""
    trace = TurboTrace()
    priors = LlrFrame.zeros(code.nc)
    result: Optional[SpaResult] = None
    for t in range(1, cfg.max_turbo_iters + 1):
        start = time.perf_counter()
        extrinsic = detector.detect(observations, priors)
        result = _decode(extrinsic, code, cfg)
        trace.append(_record(t, extrinsic, result, None, None, False, start))
        priors = result.extrinsic
        if result.parity_ok:
            break
    return result.hard, trace


class TurboReceiver(BaseReceiver):
    """Multi or single joint SDR receiver."""

    def __init__(
        self,
        code: CodeDefinition,
        bit_map: BitIndexMap,
        config: ExperimentConfig,
        solver: BaseConicSolver,
        mode: Optional[TurboMode] = None,
        constraints: Optional[CodeConstraints] = None,
    ):
        super().__init__(code, bit_map, config)
        self.mode = TurboMode(mode or config.turbo.mode)
        self.detector = JointMapSdrDetector(
            code,
            bit_map,
            solver,
            config.turbo,
            constraints or CodeConstraints.from_code(code, config.code.fs_degree_cap),
        )
        self.last_trace: Optional[TurboTrace] = None

    @property
    def name(self) -> str:
        return f"turbo-{self.mode.value}"

    @property
    def max_iterations(self) -> int:
        return self.config.turbo.max_turbo_iters

    def receive(self, observations: Sequence[RealBlockObservation], rng: np.random.Generator) -> ReceiverOutput:
        self._check_observations(observations)
        run = turbo_multi if self.mode == TurboMode.MULTI else turbo_single
        _, trace = run(observations, self.detector, self.config.turbo)
        self.last_trace = trace
        return trace.to_output()


class FullListTurboReceiver(BaseReceiver):
    """Turbo receiver with exhaustive max-log detection."""

    def __init__(self, code: CodeDefinition, bit_map: BitIndexMap, config: ExperimentConfig):
        super().__init__(code, bit_map, config)
        self.detector = FullListDetector(bit_map, config.turbo)
        self.last_trace: Optional[TurboTrace] = None

    @property
    def name(self) -> str:
        return "full-list-turbo"

    @property
    def max_iterations(self) -> int:
        return self.config.turbo.max_turbo_iters

    def receive(self, observations: Sequence[RealBlockObservation], rng: np.random.Generator) -> ReceiverOutput:
        self._check_observations(observations)
        _, trace = turbo_full_list(observations, self.detector, self.code, self.config.turbo)
        self.last_trace = trace
        return trace.to_output()
