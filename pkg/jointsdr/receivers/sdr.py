"""
One-shot SDR receivers: disjoint or joint ML-SDR followed by an extraction
rule and an optional channel decoder.
"""

from typing import List, Optional, Sequence

import numpy as np

from jointsdr.channel.mimo import BitIndexMap, RealBlockObservation
from jointsdr.coding.decoders import bf_decode, spa_decode
from jointsdr.coding.ldpc import CodeDefinition, LlrFrame, check_parity
from jointsdr.core.config import DecoderType, ExperimentConfig, ExtractionMethod
from jointsdr.core.errors import ConfigurationError, SolverInfeasibleError
from jointsdr.receivers.base import BaseReceiver, ReceiverOutput, bits_from_polar
from jointsdr.sdr.extraction import (
    extract_direct,
    extract_randomized,
    extract_rank1,
    hard_decision,
    soft_to_llr,
)
from jointsdr.sdr.forms import (
    CodeConstraints,
    ConicProblem,
    CostMatrix,
    assemble_disjoint,
    assemble_joint_ml,
    cost_matrix,
)
from jointsdr.solvers.base import BaseConicSolver, ConicSolution, SolverStatus


class SdrReceiver(BaseReceiver):
    """ML-SDR detection (disjoint or code-anchored) plus none/bf/spa decoding."""

    def __init__(
        self,
        code: CodeDefinition,
        bit_map: BitIndexMap,
        config: ExperimentConfig,
        solver: BaseConicSolver,
        joint: bool,
        constraints: Optional[CodeConstraints] = None,
    ):
        super().__init__(code, bit_map, config)
        if config.extraction == ExtractionMethod.RANDOMIZED and config.decoder == DecoderType.SPA:
            raise ConfigurationError("randomized extraction cannot feed a soft decoder")
        self.solver = solver
        self.joint = joint
        self.constraints = constraints
        if joint and constraints is None:
            self.constraints = CodeConstraints.from_code(code, config.code.fs_degree_cap)

    @property
    def name(self) -> str:
        return "joint-ml-sdr" if self.joint else "disjoint-ml-sdr"

    def build_problem(self, costs: List[CostMatrix]) -> ConicProblem:
        if self.joint:
            return assemble_joint_ml(costs, self.code, self.bit_map, self.constraints)
        return assemble_disjoint(costs)

    def _extract(self, solution: ConicSolution, costs: List[CostMatrix], rng: np.random.Generator) -> np.ndarray:
        """(K, 2Nt) soft values, or +-1 values for randomized extraction."""
        method = self.config.extraction
        rows = []
        fallbacks = 0
        for k, X in enumerate(solution.X_blocks):
            if method == ExtractionMethod.RANDOMIZED:
                rows.append(extract_randomized(X, costs[k], self.config.randomization_trials, rng))
                continue
            soft = extract_rank1(X) if method == ExtractionMethod.RANK1 else extract_direct(X)
            fallbacks += soft.fallback
            rows.append(soft.values)
        if fallbacks:
            self.logger.debug("Rank-one extraction fell back to direct", blocks=fallbacks)
        return np.stack(rows)

    def receive(self, observations: Sequence[RealBlockObservation], rng: np.random.Generator) -> ReceiverOutput:
        self._check_observations(observations)
        costs = [cost_matrix(o.H, o.y) for o in observations]
        solution = self.solver.solve(self.build_problem(costs))
        if solution.status == SolverStatus.INFEASIBLE:
            raise SolverInfeasibleError(f"{self.name} problem reported infeasible")

        soft = self._extract(solution, costs, rng)
        decoder = self.config.decoder
        if decoder == DecoderType.SPA:
            llr = soft_to_llr(self.bit_map.merge(soft), self.config.turbo.clip)
            result = spa_decode(LlrFrame(llr), self.code, self.config.turbo.spa_iters)
            bits, parity = result.hard, result.parity_ok
        else:
            bits = bits_from_polar(hard_decision(self.bit_map.merge(soft)))
            if decoder == DecoderType.BF:
                result = bf_decode(bits, self.code, self.config.bf_iters)
                bits, parity = result.bits, result.parity_ok
            else:
                parity = check_parity(bits, self.code)

        return ReceiverOutput(
            decisions=[bits],
            parity_ok=[parity],
            objectives=[solution.objective],
            n_solves=1,
        )
