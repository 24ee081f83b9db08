"""
Monte Carlo trial execution.

Every trial draws its randomness from ``SeedSequence([seed, snr_index, trial])``
so that totals do not depend on how many worker processes run the trials.
Trials are executed in ordered batches and aggregated in trial order.
"""

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Generator, Iterable, Iterator, List, Optional, Sequence, TypeVar

import numpy as np

from jointsdr.channel.mimo import BitIndexMap, transmit
from jointsdr.coding.alist import read_alist
from jointsdr.coding.ldpc import CodeDefinition, build_regular_code, encode
from jointsdr.core.config import (
    CodeConfig,
    ExperimentConfig,
    Settings,
    SolverBackend,
    noise_var_from_snr_db,
)
from jointsdr.core.errors import ReceiverError, SolverError
from jointsdr.core.logging import bind_trial, clear_trial, get_logger, get_run_id, init_worker
from jointsdr.receivers.base import BaseReceiver
from jointsdr.receivers.factory import ReceiverFactory
from jointsdr.sdr.forms import CodeConstraints
from jointsdr.solvers.base import BaseConicSolver
from jointsdr.solvers.manager import SolverFactory

logger = get_logger("harness.runner")

T = TypeVar("T")
R = TypeVar("R")

BATCH_PER_WORKER = 4


def build_code(cfg: CodeConfig) -> CodeDefinition:
    """Read the configured alist file or construct the seeded regular code."""
    if cfg.alist is not None:
        return read_alist(cfg.alist)
    return build_regular_code(cfg.nc, cfg.kc, cfg.col_weight, np.random.default_rng(cfg.seed))


def trial_rng(seed: int, *coordinates: int) -> np.random.Generator:
    """Generator for one trial, a pure function of the master seed and the trial coordinates."""
    return np.random.default_rng(np.random.SeedSequence([seed, *coordinates]))


@dataclass(frozen=True)
class SimulationContext:
    """Immutable inputs shared by all trials of one experiment."""
    config: ExperimentConfig
    code: CodeDefinition
    bit_map: BitIndexMap
    constraints: Optional[CodeConstraints]
    solver_backend: SolverBackend = SolverBackend.INTERIOR_POINT
    trace_solver: bool = False

    @classmethod
    def create(
        cls,
        config: ExperimentConfig,
        settings: Settings,
        code: Optional[CodeDefinition] = None,
        with_constraints: Optional[bool] = None,
    ) -> "SimulationContext":
        """Build the code, bit map and (when a joint form needs them) the FS inequalities."""
        code = code or build_code(config.code)
        bit_map = BitIndexMap.for_codeword(code.nc, config.nt)
        if with_constraints is None:
            with_constraints = ReceiverFactory.needs_constraints(config.receiver)
        constraints = None
        if with_constraints:
            constraints = CodeConstraints.from_code(code, config.code.fs_degree_cap)
            logger.info("FS inequalities enumerated", count=constraints.count, nc=code.nc, m=code.m)
        return cls(
            config=config,
            code=code,
            bit_map=bit_map,
            constraints=constraints,
            solver_backend=settings.solver_backend,
            trace_solver=settings.trace_solver,
        )

    def make_solver(self) -> BaseConicSolver:
        return SolverFactory.create_solver(self.solver_backend, self.config.solver, self.trace_solver)

    def make_receiver(self, dump_path: Optional[Path] = None) -> BaseReceiver:
        solver = self.make_solver() if ReceiverFactory.needs_solver(self.config.receiver) else None
        if solver is not None:
            solver.dump_path = dump_path
        return ReceiverFactory.create(self.config, self.code, self.bit_map, solver, self.constraints)


@dataclass
class TrialOutcome:
    """Result of one codeword trial; ``failed`` holds the error code of a discarded trial."""
    trial: int
    receiver: str = ""
    bit_errors: List[int] = field(default_factory=list)
    info_bit_errors: List[int] = field(default_factory=list)
    parity_ok: List[bool] = field(default_factory=list)
    objectives: List[Optional[float]] = field(default_factory=list)
    executed_iterations: int = 0
    n_solves: int = 0
    runtime_s: float = 0.0
    failed: Optional[str] = None


def run_trial(context: SimulationContext, snr_index: int, trial: int) -> TrialOutcome:
    """
    Simulate one codeword at one SNR point.

    Solver failures and aborted receivers produce a failed outcome instead of
    raising; the caller excludes those from the totals.
    """
    config = context.config
    snr_db = config.snr_db[snr_index]
    noise_var = noise_var_from_snr_db(snr_db, config.nt)
    rng = trial_rng(config.seed, snr_index, trial)
    bind_trial(snr_db, trial)
    try:
        info = rng.integers(0, 2, context.code.kc, dtype=np.uint8)
        codeword = encode(info, context.code)
        observations = transmit(codeword, context.bit_map, config.nr, noise_var, rng, config.block_fading)
        receiver = context.make_receiver(config.dump_sdpa if (snr_index, trial) == (0, 0) else None)

        start = time.perf_counter()
        try:
            output = receiver.receive(observations, rng)
        except (SolverError, ReceiverError) as exc:
            logger.warning("Trial discarded", error_type=exc.error_code, error=exc.message)
            return TrialOutcome(trial=trial, receiver=receiver.name, failed=exc.error_code)
        runtime = time.perf_counter() - start

        decisions = output.padded(config.iterations)
        info_positions = np.asarray(context.code.info_positions)
        bit_errors = [int(np.count_nonzero(d != codeword)) for d in decisions]
        return TrialOutcome(
            trial=trial,
            receiver=receiver.name,
            bit_errors=bit_errors,
            info_bit_errors=[int(np.count_nonzero(d[info_positions] != info)) for d in decisions],
            parity_ok=list(output.parity_ok),
            objectives=list(output.objectives),
            executed_iterations=output.iterations,
            n_solves=output.n_solves,
            runtime_s=runtime,
        )
    finally:
        clear_trial()


def _batches(items: Iterable[T], size: int) -> Iterator[List[T]]:
    batch: List[T] = []
    for item in items:
        batch.append(item)
        if len(batch) == size:
            yield batch
            batch = []
    if batch:
        yield batch


def ordered_map(
    func: Callable[..., R],
    tasks: Iterable[Sequence],
    workers: int = 1,
    settings: Optional[Settings] = None,
) -> Generator[R, None, None]:
    """
    Apply ``func(*task)`` to every task, yielding results in task order.

    With more than one worker the tasks run in a process pool, one batch of
    ``workers * BATCH_PER_WORKER`` tasks at a time, so an infinite task stream
    can be consumed until the caller stops iterating. Workers are initialised
    with the logging setup of ``settings`` and the current run id.
    """
    if workers <= 1:
        for task in tasks:
            yield func(*task)
        return

    initargs = (settings or Settings(), get_run_id(), os.getpid())
    with ProcessPoolExecutor(max_workers=workers, initializer=init_worker, initargs=initargs) as pool:
        for batch in _batches(tasks, workers * BATCH_PER_WORKER):
            yield from pool.map(func, *zip(*batch))


def iter_trials(
    context: SimulationContext, snr_index: int, settings: Optional[Settings] = None
) -> Generator[TrialOutcome, None, None]:
    """Endless stream of trial outcomes for one SNR point, in trial order."""

    def tasks():
        trial = 0
        while True:
            yield (context, snr_index, trial)
            trial += 1

    workers = settings.workers if settings is not None else 1
    return ordered_map(run_trial, tasks(), workers, settings)

