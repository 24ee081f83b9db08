"""
Desk-scale receiver comparisons and the exact property suites.

These run many SDP solves and are deselected by default; run them with
``pytest -m slow``.
"""

import numpy as np
import pytest

from jointsdr.core.config import CodeConfig, DecoderType, ExperimentConfig, ReceiverType, TurboConfig
from jointsdr.harness.ber import run_ber
from jointsdr.harness.checks import run_oracle_checks

pytestmark = pytest.mark.slow


def _experiment(receiver, snr_db, codewords, **extra):
    return ExperimentConfig(
        code=CodeConfig(nc=64, kc=32, col_weight=3, seed=21),
        nt=2,
        nr=2,
        snr_db=snr_db,
        receiver=receiver,
        max_codewords=codewords,
        max_bit_errors=10_000,
        seed=17,
        **extra,
    )


class TestPropertySuites:
    """Test the exact checks behind oracle-check."""

    def test_all_pass(self):
        """Polytope, SDR-vs-ML, list equivalence and relaxation bound."""
        results = run_oracle_checks(seed=1)
        assert [r.name for r in results] == [
            "polytope-equivalence",
            "sdr-vs-ml",
            "list-full-equivalence",
            "relaxation-bound",
        ]
        assert all(r.passed for r in results), [r.detail for r in results]


class TestReceiverTrends:
    """Test the qualitative ordering of the receivers."""

    def test_code_anchoring_gain(self, settings):
        """Joint ML-SDR makes fewer errors than disjoint ML-SDR on the same frames."""
        disjoint = run_ber(_experiment(ReceiverType.DISJOINT_ML_SDR, [6.0], 40, decoder=DecoderType.SPA), settings)
        joint = run_ber(_experiment(ReceiverType.JOINT_ML_SDR, [6.0], 40, decoder=DecoderType.SPA), settings)
        assert disjoint[0].bit_errors > 0
        assert joint[0].bit_errors < disjoint[0].bit_errors

    def test_single_matches_multi_in_first_iteration(self, settings):
        """Same seed, same first iteration."""
        turbo = TurboConfig(max_turbo_iters=3, P=2)
        multi = run_ber(_experiment(ReceiverType.TURBO_MULTI, [3.0], 20, turbo=turbo), settings)
        single = run_ber(_experiment(ReceiverType.TURBO_SINGLE, [3.0], 20, turbo=turbo), settings)
        assert multi[0].bit_errors == single[0].bit_errors
        assert multi[0].info_bit_errors == single[0].info_bit_errors

    def test_turbo_iterations_help(self, settings):
        """Later iterations do not lose ground on the first."""
        turbo = TurboConfig(max_turbo_iters=3, P=2)
        records = run_ber(_experiment(ReceiverType.TURBO_MULTI, [3.0], 30, turbo=turbo), settings)
        errors = [r.bit_errors for r in records]
        assert errors[2] <= errors[0] + max(5, int(0.1 * errors[0]))

    def test_single_is_cheaper(self, settings):
        """One solve per codeword runs faster than one solve per iteration at low SNR."""
        turbo = TurboConfig(max_turbo_iters=3, P=2)
        multi = run_ber(_experiment(ReceiverType.TURBO_MULTI, [0.0], 10, turbo=turbo), settings)
        single = run_ber(_experiment(ReceiverType.TURBO_SINGLE, [0.0], 10, turbo=turbo), settings)
        assert single[0].avg_runtime_s < multi[0].avg_runtime_s

    def test_runtime_falls_with_snr(self, settings):
        """Early termination shortens codewords at high SNR."""
        turbo = TurboConfig(max_turbo_iters=3, P=2)
        records = run_ber(_experiment(ReceiverType.TURBO_MULTI, [0.0, 14.0], 10, turbo=turbo), settings)
        low = records[0].avg_runtime_s
        high = records[3].avg_runtime_s
        assert np.isfinite(low) and high < low

    def test_joint_first_iteration_beats_full_list(self, settings):
        """Code-anchored detection makes no more first-iteration errors than the full-list detector."""
        turbo = TurboConfig(max_turbo_iters=3, P=2)
        joint = run_ber(_experiment(ReceiverType.TURBO_MULTI, [2.0], 30, turbo=turbo), settings)
        full = run_ber(_experiment(ReceiverType.FULL_LIST_TURBO, [2.0], 30, turbo=turbo), settings)
        assert joint[0].iteration == full[0].iteration == 1
        assert joint[0].ber <= full[0].ber
