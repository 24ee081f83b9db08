"""
Exact property suites behind ``jointsdr oracle-check``.

Each check returns a :class:`CheckResult`; the CLI fails when any check fails.
"""

from itertools import product
from typing import Callable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from jointsdr.channel.mimo import BitIndexMap, RealBlockObservation, transmit
from jointsdr.coding.ldpc import CodeDefinition, build_regular_code, check_parity, encode, hamming_7_4
from jointsdr.coding.polytope import enumerate_fs_constraints, satisfies_all
from jointsdr.core.config import SolverConfig, noise_var_from_snr_db
from jointsdr.core.errors import SolverError
from jointsdr.core.logging import get_logger
from jointsdr.detection.lists import extrinsic_llr, full_list_detector, gen_list, ml_brute_force
from jointsdr.sdr.extraction import extract_direct, hard_decision
from jointsdr.sdr.forms import CodeConstraints, ConicProblem, assemble_disjoint, assemble_joint_ml, cost_matrix
from jointsdr.solvers.base import BaseConicSolver, ConicSolution
from jointsdr.solvers.interior_point import InteriorPointSolver

logger = get_logger("harness.checks")

SDR_MATCH_RATE = 0.95
NOISELESS_OBJECTIVE_TOL = 1e-6
LIST_EQUIVALENCE_TOL = 1e-12
RELAXATION_LOWER_TOL = 1e-7


class CheckResult(BaseModel):
    """Outcome of one property suite."""
    name: str
    passed: bool
    instances: int
    failures: int = 0
    detail: str = ""


def check_polytope(code: Optional[CodeDefinition] = None) -> CheckResult:
    """FS feasibility agrees with parity on every binary vector of a short code."""
    code = code or hamming_7_4()
    constraints = enumerate_fs_constraints(code)
    failures = 0
    total = 0
    for bits in product((0, 1), repeat=code.nc):
        f = np.array(bits, dtype=float)
        total += 1
        failures += satisfies_all(f, constraints, code.nc) != check_parity(f.astype(np.uint8), code)
    return CheckResult(
        name="polytope-equivalence",
        passed=failures == 0,
        instances=total,
        failures=failures,
        detail=f"{len(constraints)} FS inequalities",
    )


def _single_snapshot(nt: int, noise_var: float, rng: np.random.Generator) -> Tuple[RealBlockObservation, np.ndarray]:
    """One Nt x Nt snapshot and its transmitted +-1 vector in real-vector order."""
    bit_map = BitIndexMap(nt=nt, k=1)
    bits = rng.integers(0, 2, 2 * nt, dtype=np.uint8)
    obs = transmit(bits, bit_map, nt, noise_var, rng)[0]
    return obs, bit_map.split(1.0 - 2.0 * bits)[0]


def _solve_or_none(solver: BaseConicSolver, problem: ConicProblem) -> Optional[ConicSolution]:
    """Solve, logging a failed solve instead of raising."""
    try:
        return solver.solve(problem)
    except SolverError as exc:
        logger.warning("Check instance failed to solve", form=problem.kind.value, error=str(exc))
        return None


def check_sdr_oracle(
    solver: BaseConicSolver,
    rng: np.random.Generator,
    instances: int = 200,
    noiseless: int = 50,
    snr_db: float = 12.0,
    nt: int = 2,
) -> CheckResult:
    """
    Disjoint ML-SDR with direct extraction against brute-force ML.

    Noisy instances must agree at least ``SDR_MATCH_RATE`` of the time;
    noiseless instances must all agree with an objective at zero. A solve
    that raises counts as a disagreement.
    """
    noise_var = noise_var_from_snr_db(snr_db, nt)
    matches = 0
    for _ in range(instances):
        obs, _ = _single_snapshot(nt, noise_var, rng)
        solution = _solve_or_none(solver, assemble_disjoint([cost_matrix(obs.H, obs.y)]))
        if solution is None:
            continue
        sdr = hard_decision(extract_direct(solution.block(0)))
        matches += bool(np.array_equal(sdr, ml_brute_force(obs.y, obs.H)))

    noiseless_failures = 0
    for _ in range(noiseless):
        obs, truth = _single_snapshot(nt, 0.0, rng)
        solution = _solve_or_none(solver, assemble_disjoint([cost_matrix(obs.H, obs.y)]))
        if solution is None:
            noiseless_failures += 1
            continue
        sdr = hard_decision(extract_direct(solution.block(0)))
        if not np.array_equal(sdr, truth) or solution.objective > NOISELESS_OBJECTIVE_TOL:
            noiseless_failures += 1

    rate = matches / instances if instances else 1.0
    return CheckResult(
        name="sdr-vs-ml",
        passed=rate >= SDR_MATCH_RATE and noiseless_failures == 0,
        instances=instances + noiseless,
        failures=(instances - matches) + noiseless_failures,
        detail=f"match rate {rate:.3f}, noiseless failures {noiseless_failures}",
    )


def check_list_equivalence(rng: np.random.Generator, instances: int = 100, nt: int = 2) -> CheckResult:
    """A list of radius 2*Nt reproduces the full-list extrinsics before clipping."""
    width = 2 * nt
    failures = 0
    worst = 0.0
    for _ in range(instances):
        H = rng.standard_normal((width, width))
        y = rng.standard_normal(width) * 2.0
        priors = rng.standard_normal(width) * 2.0
        center = np.where(rng.integers(0, 2, width) == 0, 1, -1)
        listed = extrinsic_llr(gen_list(center, width), y, H, 1.0, priors, clip=None)
        full = full_list_detector(y, H, 1.0, priors, clip=None)
        gap = float(np.max(np.abs(listed - full)))
        worst = max(worst, gap)
        failures += gap > LIST_EQUIVALENCE_TOL
    return CheckResult(
        name="list-full-equivalence",
        passed=failures == 0,
        instances=instances,
        failures=failures,
        detail=f"max deviation {worst:.2e}",
    )


def check_relaxation_bound(
    solver: BaseConicSolver,
    rng: np.random.Generator,
    instances: int = 10,
    snr_db: float = 4.0,
    nt: int = 2,
    code: Optional[CodeDefinition] = None,
) -> CheckResult:
    """The joint ML-SDR optimum lies between zero and the ML cost of the transmitted point; a failed solve fails."""
    code = code or build_regular_code(16, 8, 3, np.random.default_rng(7))
    bit_map = BitIndexMap.for_codeword(code.nc, nt)
    constraints = CodeConstraints.from_code(code)
    noise_var = noise_var_from_snr_db(snr_db, nt)
    failures = 0
    for _ in range(instances):
        codeword = encode(rng.integers(0, 2, code.kc, dtype=np.uint8), code)
        observations = transmit(codeword, bit_map, nt, noise_var, rng)
        costs = [cost_matrix(o.H, o.y) for o in observations]
        solution = _solve_or_none(solver, assemble_joint_ml(costs, code, bit_map, constraints))
        if solution is None:
            failures += 1
            continue
        symbols = bit_map.split(1.0 - 2.0 * codeword)
        ml_cost = sum(c.quadratic(x) for c, x in zip(costs, symbols))
        upper = ml_cost + NOISELESS_OBJECTIVE_TOL * (1.0 + ml_cost)
        if not -RELAXATION_LOWER_TOL <= solution.objective <= upper:
            failures += 1
            logger.warning("Relaxation bound violated", objective=solution.objective, ml_cost=ml_cost)
    return CheckResult(
        name="relaxation-bound",
        passed=failures == 0,
        instances=instances,
        failures=failures,
    )


def run_oracle_checks(seed: int = 0, solver: Optional[BaseConicSolver] = None) -> List[CheckResult]:
    """Run every property suite with generators derived from ``seed``."""
    solver = solver or InteriorPointSolver(SolverConfig(gap_tol=1e-7, feas_tol=1e-8))
    streams = np.random.SeedSequence(seed).spawn(3)
    suites: List[Callable[[], CheckResult]] = [
        check_polytope,
        lambda: check_sdr_oracle(solver, np.random.default_rng(streams[0])),
        lambda: check_list_equivalence(np.random.default_rng(streams[1])),
        lambda: check_relaxation_bound(solver, np.random.default_rng(streams[2])),
    ]
    results = []
    for suite in suites:
        result = suite()
        log = logger.info if result.passed else logger.error
        log("Check finished", check=result.name, passed=result.passed, failures=result.failures, detail=result.detail)
        results.append(result)
    return results
