"""
EXIT-chart measurement of the soft detectors.

A-priori LLRs follow the consistent Gaussian model ``L = (s^2/2) b + s z``
with ``s = J^-1(I_A)``. The extrinsic information of the detector output is
measured with conditional histograms.
"""

import math
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy.integrate import quad
from scipy.optimize import bisect

from jointsdr.channel.mimo import transmit
from jointsdr.coding.ldpc import CodeDefinition, LlrFrame, encode
from jointsdr.core.config import ExitDetector, ExperimentConfig, Settings, get_settings, noise_var_from_snr_db
from jointsdr.core.errors import ConfigurationError, SolverError
from jointsdr.core.logging import bind_trial, clear_trial, get_logger
from jointsdr.harness.results import ExitRecord
from jointsdr.harness.runner import SimulationContext, ordered_map, trial_rng
from jointsdr.observability.metrics import record_error
from jointsdr.receivers.turbo import FullListDetector, JointMapSdrDetector

logger = get_logger("harness.exit")

J_INVERSE_XTOL = 1e-6
_SIGMA_CEILING = 200.0

# Smallest sample the histogram estimator accepts
MIN_MI_SAMPLES = 1000


def j_function(sigma: float) -> float:
    """Mutual information between a bit and a consistent Gaussian LLR of standard deviation ``sigma``."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return 0.0
    mean, var = sigma * sigma / 2.0, sigma * sigma

    def integrand(xi: float) -> float:
        density = math.exp(-((xi - mean) ** 2) / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)
        return density * np.logaddexp(0.0, -xi) / math.log(2.0)

    loss, _ = quad(integrand, mean - 12.0 * sigma, mean + 12.0 * sigma, limit=200)
    return min(max(1.0 - loss, 0.0), 1.0)


def j_inverse(mi: float) -> float:
    """Solve ``J(sigma) = mi`` by bisection."""
    if not 0.0 <= mi < 1.0:
        raise ValueError(f"mutual information {mi} outside [0, 1)")
    if mi == 0.0:
        return 0.0
    upper = 10.0
    while j_function(upper) < mi:
        upper *= 2.0
        if upper > _SIGMA_CEILING:
            raise ValueError(f"mutual information {mi} too close to 1")
    return float(bisect(lambda s: j_function(s) - mi, 0.0, upper, xtol=J_INVERSE_XTOL))


def gen_apriori(target_mi: float, true_bits: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """
    Draw consistent Gaussian a-priori LLRs with mutual information ``target_mi``.

    Args:
        target_mi: ``I_A`` in ``[0, 1)``
        true_bits: +-1 vector (+1 for bit 0)
        rng: Random source

    Raises:
        ValueError: If ``target_mi`` is outside ``[0, 1)``
    """
    sigma = j_inverse(target_mi)
    b = np.asarray(true_bits, dtype=float)
    if sigma == 0.0:
        return np.zeros_like(b)
    return (sigma * sigma / 2.0) * b + sigma * rng.standard_normal(b.shape)


def measure_mi(llrs: np.ndarray, true_bits: np.ndarray, bins: int = 100) -> float:
    """
    Histogram estimate of the mutual information between bits and LLRs.

    Both conditional histograms share ``bins`` equal bins spanning the
    observed LLR range; the estimate is clamped to ``[0, 1]`` and an input
    with a single LLR value carries no information.

    Raises:
        ValueError: If the lengths differ or fewer than ``MIN_MI_SAMPLES`` LLRs are given
    """
    llrs = np.asarray(llrs, dtype=float).ravel()
    b = np.asarray(true_bits).ravel()
    if llrs.shape != b.shape:
        raise ValueError(f"{llrs.size} LLRs for {b.size} bits")
    if llrs.size < MIN_MI_SAMPLES:
        raise ValueError(f"{llrs.size} LLRs; the histogram estimate needs at least {MIN_MI_SAMPLES}")
    lo, hi = float(llrs.min()), float(llrs.max())
    plus, minus = llrs[b > 0], llrs[b < 0]
    if lo == hi or plus.size == 0 or minus.size == 0:
        return 0.0

    edges = np.linspace(lo, hi, bins + 1)
    p_plus = np.histogram(plus, bins=edges)[0] / plus.size
    p_minus = np.histogram(minus, bins=edges)[0] / minus.size
    mix = p_plus + p_minus

    info = 0.0
    for p in (p_plus, p_minus):
        used = p > 0
        info += 0.5 * float(np.sum(p[used] * np.log2(2.0 * p[used] / mix[used])))
    return min(max(info, 0.0), 1.0)


def _exit_trial(
    context: SimulationContext,
    snr_index: int,
    ia_index: int,
    codeword_index: int,
) -> Union[Tuple[np.ndarray, np.ndarray], str]:
    """One detector pass; returns (extrinsic LLRs, +-1 truth), or the error code on solver failure."""
    config = context.config
    snr_db = config.snr_db[snr_index]
    i_a = config.exit.ia_grid[ia_index]
    rng = trial_rng(config.seed, snr_index, ia_index, codeword_index)
    bind_trial(snr_db, codeword_index)
    try:
        info = rng.integers(0, 2, context.code.kc, dtype=np.uint8)
        codeword = encode(info, context.code)
        truth = 1.0 - 2.0 * codeword
        noise_var = noise_var_from_snr_db(snr_db, config.nt)
        observations = transmit(codeword, context.bit_map, config.nr, noise_var, rng, config.block_fading)
        priors = LlrFrame(gen_apriori(i_a, truth, rng))

        if config.exit.detector == ExitDetector.FULL_LIST:
            detector = FullListDetector(context.bit_map, config.turbo)
        else:
            detector = JointMapSdrDetector(
                context.code, context.bit_map, context.make_solver(), config.turbo, context.constraints
            )
        try:
            extrinsic = detector.detect(observations, priors)
        except SolverError as exc:
            logger.warning("EXIT trial discarded", error_type=exc.error_code, i_a=i_a)
            return exc.error_code
        return extrinsic.values, truth
    finally:
        clear_trial()


def run_exit(
    config: ExperimentConfig,
    settings: Optional[Settings] = None,
    code: Optional[CodeDefinition] = None,
) -> List[ExitRecord]:
    """
    Measure ``I_E(I_A)`` of the configured detector on the SNR x I_A grid.

    A point whose failed solves leave fewer than ``MIN_MI_SAMPLES`` LLRs is
    recorded with ``i_e = nan``.

    Returns:
        One record per grid point, SNR-major

    Raises:
        ConfigurationError: If ``exit.codewords`` codewords carry fewer than ``MIN_MI_SAMPLES`` bits
    """
    settings = settings or get_settings()
    joint = config.exit.detector == ExitDetector.JOINT_MAP_SDR
    context = SimulationContext.create(config, settings, code, with_constraints=joint)
    if config.exit.codewords * context.code.nc < MIN_MI_SAMPLES:
        raise ConfigurationError(
            f"exit.codewords = {config.exit.codewords} gives {config.exit.codewords * context.code.nc} LLRs "
            f"per point; at least {MIN_MI_SAMPLES} are needed"
        )
    records: List[ExitRecord] = []
    logger.info(
        "Starting EXIT run",
        detector=config.exit.detector.value,
        snr_points=len(config.snr_db),
        ia_points=len(config.exit.ia_grid),
        codewords=config.exit.codewords,
    )

    for snr_index, snr_db in enumerate(config.snr_db):
        for ia_index, i_a in enumerate(config.exit.ia_grid):
            tasks = [(context, snr_index, ia_index, c) for c in range(config.exit.codewords)]
            passes = []
            for result in ordered_map(_exit_trial, tasks, settings.workers, settings):
                if isinstance(result, str):
                    record_error(result, "exit")
                else:
                    passes.append(result)
            samples = sum(p[0].size for p in passes)
            if samples >= MIN_MI_SAMPLES:
                llrs = np.concatenate([p[0] for p in passes])
                truth = np.concatenate([p[1] for p in passes])
                i_e = measure_mi(llrs, truth, config.exit.bins)
            else:
                logger.error("EXIT point left without enough LLRs", snr_db=snr_db, i_a=i_a, samples=samples)
                i_e = float("nan")
            records.append(ExitRecord(snr_db=snr_db, i_a=i_a, i_e=i_e, codewords=len(passes)))
            logger.info("EXIT point measured", snr_db=snr_db, i_a=i_a, i_e=i_e, codewords=len(passes))
    return records
