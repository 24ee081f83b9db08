"""
BER simulation.

For every SNR point codewords are simulated in trial order until either
``max_codewords`` valid trials have been counted or the final-iteration coded
bit errors reach ``max_bit_errors``. Iterative receivers report one record per
turbo iteration; a codeword that stopped early keeps its final decision in the
later iterations.
"""

from typing import List, Optional

from jointsdr.coding.ldpc import CodeDefinition
from jointsdr.core.config import ExperimentConfig, Settings, get_settings
from jointsdr.core.logging import get_logger
from jointsdr.harness.results import BerRecord, TraceWriter
from jointsdr.harness.runner import SimulationContext, TrialOutcome, iter_trials
from jointsdr.observability.metrics import record_codeword, record_error

logger = get_logger("harness.ber")


class _PointTally:
    """Running totals of one SNR point."""

    def __init__(self, iterations: int):
        self.codewords = 0
        self.failed = 0
        self.runtime = 0.0
        self.bit_errors = [0] * iterations
        self.info_bit_errors = [0] * iterations

    def add(self, outcome: TrialOutcome) -> None:
        if outcome.failed is not None:
            self.failed += 1
            record_error(outcome.failed, "harness")
            return
        record_codeword(outcome.receiver, outcome.bit_errors[-1], outcome.runtime_s)
        self.codewords += 1
        self.runtime += outcome.runtime_s
        for t, (errors, info_errors) in enumerate(zip(outcome.bit_errors, outcome.info_bit_errors)):
            self.bit_errors[t] += errors
            self.info_bit_errors[t] += info_errors

    def records(self, snr_db: float, code: CodeDefinition) -> List[BerRecord]:
        avg_runtime = self.runtime / self.codewords if self.codewords else 0.0
        return [
            BerRecord(
                snr_db=snr_db,
                iteration=t + 1,
                codewords=self.codewords,
                bits=self.codewords * code.nc,
                bit_errors=self.bit_errors[t],
                avg_runtime_s=avg_runtime,
                info_bits=self.codewords * code.kc,
                info_bit_errors=self.info_bit_errors[t],
                failed_trials=self.failed,
            )
            for t in range(len(self.bit_errors))
        ]


def _trace_entries(snr_db: float, outcome: TrialOutcome):
    for t in range(outcome.executed_iterations):
        yield {
            "snr_db": snr_db,
            "trial": outcome.trial,
            "iteration": t + 1,
            "objective": outcome.objectives[t],
            "parity_ok": outcome.parity_ok[t],
            "n_solves": outcome.n_solves,
            "bit_errors": outcome.bit_errors[t],
            "runtime_s": outcome.runtime_s,
        }


def run_ber(
    config: ExperimentConfig,
    settings: Optional[Settings] = None,
    code: Optional[CodeDefinition] = None,
) -> List[BerRecord]:
    """
    Run the BER experiment described by ``config``.

    Args:
        config: Experiment configuration
        settings: Process settings (worker count, solver back-end)
        code: Use this code instead of building the configured one

    Returns:
        One record per SNR point and iteration, SNR-major
    """
    settings = settings or get_settings()
    context = SimulationContext.create(config, settings, code)
    records: List[BerRecord] = []
    logger.info(
        "Starting BER run",
        receiver=config.receiver.value,
        nc=context.code.nc,
        kc=context.code.kc,
        snr_points=len(config.snr_db),
        workers=settings.workers,
    )

    with TraceWriter(config.trace_path) as trace:
        for snr_index, snr_db in enumerate(config.snr_db):
            tally = _PointTally(config.iterations)
            trials = iter_trials(context, snr_index, settings)
            try:
                for outcome in trials:
                    tally.add(outcome)
                    if outcome.failed is None:
                        for entry in _trace_entries(snr_db, outcome):
                            trace.write(entry)
                    if tally.codewords >= config.max_codewords or tally.bit_errors[-1] >= config.max_bit_errors:
                        break
                    if tally.failed > config.max_codewords:
                        logger.error("Too many failed trials, closing SNR point", failed=tally.failed)
                        break
            finally:
                trials.close()

            point = tally.records(snr_db, context.code)
            records.extend(point)
            logger.info(
                "SNR point finished",
                snr_db=snr_db,
                codewords=tally.codewords,
                failed=tally.failed,
                bit_errors=tally.bit_errors[-1],
                ber=point[-1].ber,
                avg_runtime_s=point[-1].avg_runtime_s,
            )
    return records
