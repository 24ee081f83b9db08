"""
Unit tests for the one-shot, oracle and turbo receivers.
"""

import numpy as np
import pytest

from jointsdr.channel.mimo import transmit
from jointsdr.coding.ldpc import LlrFrame, encode
from jointsdr.core.config import (
    DecoderType,
    ExtractionMethod,
    ReceiverType,
    TurboConfig,
    noise_var_from_snr_db,
)
from jointsdr.core.errors import ConfigurationError, DimensionError, ReceiverError, SolverNumericalError
from jointsdr.receivers.factory import ReceiverFactory
from jointsdr.receivers.oracle import MlOracleReceiver
from jointsdr.receivers.sdr import SdrReceiver
from jointsdr.receivers.turbo import (
    FullListDetector,
    FullListTurboReceiver,
    JointMapSdrDetector,
    TurboReceiver,
    turbo_full_list,
    turbo_multi,
    turbo_single,
)
from jointsdr.sdr.extraction import hard_decision
from jointsdr.solvers.interior_point import InteriorPointSolver


class FlakySolver(InteriorPointSolver):
    """Solves the first problem, then breaks down."""

    def __init__(self, *args, good_calls: int = 1, **kwargs):
        super().__init__(*args, **kwargs)
        self.good_calls = good_calls
        self.calls = 0

    @property
    def name(self) -> str:
        return "flaky"

    def _solve(self, problem):
        self.calls += 1
        if self.calls > self.good_calls:
            raise SolverNumericalError("forced breakdown")
        return super()._solve(problem)


def _frame(code, bit_map, noise_var, seed):
    rng = np.random.default_rng(seed)
    codeword = encode(rng.integers(0, 2, code.kc).astype(np.uint8), code)
    return codeword, transmit(codeword, bit_map, 2, noise_var, rng)


def _turbo_config(config, receiver, iters=3):
    return config.model_copy(update={"receiver": receiver, "turbo": TurboConfig(max_turbo_iters=iters, P=2)})


def _slow_frame(small_code, small_map, small_constraints, solver):
    """A low-SNR frame the first turbo iteration does not decode."""
    turbo = TurboConfig(max_turbo_iters=2, P=2)
    detector = JointMapSdrDetector(small_code, small_map, solver, turbo, small_constraints)
    for seed in range(50):
        _, observations = _frame(small_code, small_map, noise_var_from_snr_db(-2.0, 2), seed)
        _, trace = turbo_single(observations, detector, turbo)
        if len(trace) == 2:
            return observations
    pytest.fail("no frame needed a second iteration")


class TestSdrReceiver:
    """Test disjoint and joint ML-SDR receivers."""

    @pytest.mark.parametrize("joint", [False, True])
    def test_near_noiseless(self, small_code, small_map, small_config, small_constraints, solver, joint):
        """Both forms recover the codeword at negligible noise."""
        config = small_config.model_copy(update={"decoder": DecoderType.NONE})
        receiver = SdrReceiver(small_code, small_map, config, solver, joint=joint, constraints=small_constraints)
        codeword, observations = _frame(small_code, small_map, 1e-6, 3)
        output = receiver.receive(observations, np.random.default_rng(0))
        assert output.iterations == 1
        assert output.n_solves == 1
        assert output.parity_ok == [True]
        np.testing.assert_array_equal(output.final, codeword)

    @pytest.mark.parametrize(
        "extraction, decoder",
        [
            (ExtractionMethod.RANK1, DecoderType.SPA),
            (ExtractionMethod.DIRECT, DecoderType.BF),
            (ExtractionMethod.RANDOMIZED, DecoderType.BF),
        ],
    )
    def test_extraction_decoder_combinations(self, small_code, small_map, small_config, solver, extraction, decoder):
        """Test every supported extraction feeds its decoder."""
        config = small_config.model_copy(update={"extraction": extraction, "decoder": decoder})
        receiver = SdrReceiver(small_code, small_map, config, solver, joint=False)
        codeword, observations = _frame(small_code, small_map, 1e-4, 4)
        output = receiver.receive(observations, np.random.default_rng(0))
        assert output.final.shape == (32,)
        np.testing.assert_array_equal(output.final, codeword)

    def test_randomized_soft_rejected(self, small_code, small_map, small_config, solver):
        """Randomized extraction has no soft output."""
        config = small_config.model_copy(
            update={"extraction": ExtractionMethod.RANDOMIZED, "decoder": DecoderType.SPA}
        )
        with pytest.raises(ConfigurationError):
            SdrReceiver(small_code, small_map, config, solver, joint=False)

    def test_snapshot_count(self, small_code, small_map, small_config, solver):
        """Test the number of observations is checked."""
        receiver = SdrReceiver(small_code, small_map, small_config, solver, joint=False)
        _, observations = _frame(small_code, small_map, 0.1, 0)
        with pytest.raises(DimensionError):
            receiver.receive(observations[:-1], np.random.default_rng(0))


class TestOracle:
    """Test the brute-force ML receiver."""

    def test_noiseless(self, small_code, small_map, small_config):
        """Test exact recovery without noise."""
        config = small_config.model_copy(update={"receiver": ReceiverType.ML_ORACLE, "decoder": DecoderType.NONE})
        codeword, observations = _frame(small_code, small_map, 1e-9, 5)
        output = MlOracleReceiver(small_code, small_map, config).receive(observations, np.random.default_rng(0))
        assert output.objectives == [None]
        assert output.n_solves == 0
        np.testing.assert_array_equal(output.final, codeword)


class TestTurboSchedules:
    """Test multi, single and full-list iterations."""

    def test_early_stop(self, small_code, small_map, small_constraints, solver):
        """A clean frame stops after one iteration; padding repeats the decision."""
        turbo = TurboConfig(max_turbo_iters=3)
        detector = JointMapSdrDetector(small_code, small_map, solver, turbo, small_constraints)
        codeword, observations = _frame(small_code, small_map, 1e-3, 6)
        bits, trace = turbo_multi(observations, detector, turbo)
        assert len(trace) == 1
        assert trace.iterations[0].parity_ok
        np.testing.assert_array_equal(bits, codeword)
        output = trace.to_output()
        assert [d.tolist() for d in output.padded(3)] == [bits.tolist()] * 3

    @pytest.mark.parametrize("seed", [20, 21, 22])
    @pytest.mark.parametrize("schedule", [turbo_multi, turbo_single])
    def test_clean_frame_exits_after_solving(
        self, small_code, small_map, small_constraints, solver, seed, schedule
    ):
        """A clean frame is solved, passes parity and ends the schedule at the first iteration."""
        turbo = TurboConfig(max_turbo_iters=3)
        detector = JointMapSdrDetector(small_code, small_map, solver, turbo, small_constraints)
        codeword, observations = _frame(small_code, small_map, 1e-6, seed)
        bits, trace = schedule(observations, detector, turbo)
        assert len(trace) == 1
        assert trace.iterations[0].solved
        assert trace.iterations[0].parity_ok
        np.testing.assert_array_equal(bits, codeword)

    def test_first_iteration_identical(self, small_code, small_map, small_constraints, solver):
        """Multi and single coincide in the first iteration."""
        turbo = TurboConfig(max_turbo_iters=1)
        detector = JointMapSdrDetector(small_code, small_map, solver, turbo, small_constraints)
        _, observations = _frame(small_code, small_map, noise_var_from_snr_db(2.0, 2), 7)
        _, multi = turbo_multi(observations, detector, turbo)
        _, single = turbo_single(observations, detector, turbo)
        first_m, first_s = multi.iterations[0], single.iterations[0]
        np.testing.assert_allclose(first_m.extrinsic.values, first_s.extrinsic.values)
        np.testing.assert_array_equal(first_m.hard, first_s.hard)
        assert first_m.objective == pytest.approx(first_s.objective)

    def test_first_iteration_uses_zero_priors(self, small_code, small_map, small_constraints, solver):
        """The first multi iteration solves with L_A1 = 0."""
        turbo = TurboConfig()
        detector = JointMapSdrDetector(small_code, small_map, solver, turbo, small_constraints)
        _, observations = _frame(small_code, small_map, 0.3, 8)
        _, trace = turbo_multi(observations, detector, TurboConfig(max_turbo_iters=1))
        centers, objective = detector.solve_centers(observations, LlrFrame.zeros(32))
        assert trace.iterations[0].objective == pytest.approx(objective)
        np.testing.assert_array_equal(trace.iterations[0].centers, centers)

    def test_single_recentres_on_combined_llrs(self, small_code, small_map, small_constraints, solver):
        """Later centres are the hard decision of L_E1_init + L_A1, with one solve in total."""
        observations = _slow_frame(small_code, small_map, small_constraints, solver)
        turbo = TurboConfig(max_turbo_iters=3, P=2)
        detector = JointMapSdrDetector(small_code, small_map, solver, turbo, small_constraints)
        _, trace = turbo_single(observations, detector, turbo)
        assert trace.n_solves == 1
        initial = trace.iterations[0].extrinsic
        for t in range(1, len(trace)):
            previous = trace.iterations[t - 1].feedback
            expected = small_map.split(hard_decision(initial + previous))
            np.testing.assert_array_equal(trace.iterations[t].centers, expected)
            assert trace.iterations[t].objective is None

    def test_multi_solves_every_iteration(self, small_code, small_map, small_constraints, solver):
        """Test one solve per executed iteration."""
        observations = _slow_frame(small_code, small_map, small_constraints, solver)
        turbo = TurboConfig(max_turbo_iters=2, P=2)
        detector = JointMapSdrDetector(small_code, small_map, solver, turbo, small_constraints)
        _, trace = turbo_multi(observations, detector, turbo)
        assert trace.n_solves == len(trace) == 2

    def test_multi_falls_back_to_previous_centres(self, small_code, small_map, small_constraints, solver):
        """A failed later solve reuses the last centres."""
        observations = _slow_frame(small_code, small_map, small_constraints, solver)
        turbo = TurboConfig(max_turbo_iters=2, P=2)
        detector = JointMapSdrDetector(small_code, small_map, FlakySolver(solver.config), turbo, small_constraints)
        _, trace = turbo_multi(observations, detector, turbo)
        first, second = trace.iterations
        assert first.solved and not second.solved
        assert second.objective is None
        np.testing.assert_array_equal(second.centers, first.centers)

    def test_first_solve_failure_aborts(self, small_code, small_map, small_config, small_constraints, solver):
        """Test a failure in the first iteration raises for both schedules."""
        turbo = TurboConfig(max_turbo_iters=2)
        _, observations = _frame(small_code, small_map, 0.1, 9)
        for run in (turbo_multi, turbo_single):
            detector = JointMapSdrDetector(
                small_code, small_map, FlakySolver(good_calls=0), turbo, small_constraints
            )
            with pytest.raises(ReceiverError):
                run(observations, detector, turbo)

    def test_full_list(self, small_code, small_map):
        """The full-list baseline decodes a clean frame without solves."""
        turbo = TurboConfig(max_turbo_iters=2)
        codeword, observations = _frame(small_code, small_map, 1e-2, 10)
        bits, trace = turbo_full_list(observations, FullListDetector(small_map, turbo), small_code, turbo)
        assert trace.n_solves == 0
        np.testing.assert_array_equal(bits, codeword)

    def test_extrinsics_clipped(self, small_code, small_map, small_constraints, solver):
        """Detector extrinsics respect the clip bound."""
        turbo = TurboConfig(clip=4.0)
        detector = JointMapSdrDetector(small_code, small_map, solver, turbo, small_constraints)
        _, observations = _frame(small_code, small_map, 1e-3, 11)
        llr = detector.detect(observations, LlrFrame.zeros(32))
        assert np.max(np.abs(llr.values)) <= 4.0


class TestTurboReceivers:
    """Test the receiver wrappers."""

    def test_trace_kept(self, small_code, small_map, small_config, small_constraints, solver):
        """Test the last trace is exposed."""
        config = _turbo_config(small_config, ReceiverType.TURBO_SINGLE)
        receiver = TurboReceiver(small_code, small_map, config, solver, "single", small_constraints)
        _, observations = _frame(small_code, small_map, 1e-2, 12)
        output = receiver.receive(observations, np.random.default_rng(0))
        assert receiver.name == "turbo-single"
        assert receiver.max_iterations == 3
        assert len(receiver.last_trace) == output.iterations

    def test_full_list_receiver(self, small_code, small_map, small_config):
        """Test the full-list wrapper."""
        config = _turbo_config(small_config, ReceiverType.FULL_LIST_TURBO)
        receiver = FullListTurboReceiver(small_code, small_map, config)
        codeword, observations = _frame(small_code, small_map, 1e-2, 13)
        output = receiver.receive(observations, np.random.default_rng(0))
        np.testing.assert_array_equal(output.final, codeword)


class TestReceiverFactory:
    """Test receiver selection."""

    @pytest.mark.parametrize(
        "kind, name",
        [
            (ReceiverType.DISJOINT_ML_SDR, "disjoint-ml-sdr"),
            (ReceiverType.JOINT_ML_SDR, "joint-ml-sdr"),
            (ReceiverType.TURBO_MULTI, "turbo-multi"),
            (ReceiverType.TURBO_SINGLE, "turbo-single"),
            (ReceiverType.FULL_LIST_TURBO, "full-list-turbo"),
        ],
    )
    def test_create(self, small_code, small_map, small_config, small_constraints, solver, kind, name):
        """Test each receiver type maps to its receiver."""
        config = small_config.model_copy(update={"receiver": kind})
        receiver = ReceiverFactory.create(config, small_code, small_map, solver, small_constraints)
        assert receiver.name == name

    def test_oracle(self, small_code, small_map, small_config):
        """Test the oracle needs no solver."""
        config = small_config.model_copy(update={"receiver": ReceiverType.ML_ORACLE, "decoder": DecoderType.BF})
        assert not ReceiverFactory.needs_solver(ReceiverType.ML_ORACLE)
        assert isinstance(ReceiverFactory.create(config, small_code, small_map), MlOracleReceiver)

    def test_missing_solver(self, small_code, small_map, small_config):
        """Test SDR receivers require a solver."""
        with pytest.raises(ValueError, match="needs a conic solver"):
            ReceiverFactory.create(small_config, small_code, small_map)

    def test_constraint_needs(self):
        """Only code-anchored receivers enumerate FS inequalities."""
        assert ReceiverFactory.needs_constraints(ReceiverType.TURBO_SINGLE)
        assert not ReceiverFactory.needs_constraints(ReceiverType.DISJOINT_ML_SDR)
        assert not ReceiverFactory.needs_constraints(ReceiverType.FULL_LIST_TURBO)
