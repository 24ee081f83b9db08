"""
Integration tests for the EXIT harness.
"""

import pytest

from jointsdr.core.config import ExitConfig, ExitDetector
from jointsdr.core.errors import ConfigurationError
from jointsdr.harness.exit import run_exit


def _exit_config(small_config, detector, grid, codewords=32, snr_db=4.0):
    return small_config.model_copy(
        update={
            "snr_db": [snr_db],
            "exit": ExitConfig(ia_grid=grid, codewords=codewords, detector=detector, bins=20),
        }
    )


class TestRunExit:
    """Test EXIT measurement on the small code."""

    def test_full_list_grid(self, small_config, settings):
        """One record per (SNR, I_A) point, SNR-major."""
        config = _exit_config(small_config, ExitDetector.FULL_LIST, [0.0, 0.6])
        records = run_exit(config, settings)
        assert [(r.snr_db, r.i_a) for r in records] == [(4.0, 0.0), (4.0, 0.6)]
        assert all(r.codewords == 32 for r in records)
        assert all(0.0 <= r.i_e <= 1.0 for r in records)

    def test_deterministic(self, small_config, settings):
        """Test repeated runs measure the same values."""
        config = _exit_config(small_config, ExitDetector.FULL_LIST, [0.3])
        assert run_exit(config, settings)[0].i_e == run_exit(config, settings)[0].i_e

    def test_too_few_llrs_per_point(self, small_config, settings):
        """Test a grid point must carry at least a thousand LLRs."""
        config = _exit_config(small_config, ExitDetector.FULL_LIST, [0.3], codewords=31)
        with pytest.raises(ConfigurationError, match="at least 1000"):
            run_exit(config, settings)

    def test_full_list_non_decreasing(self, small_config, settings):
        """More a-priori information never lowers the full-list extrinsic information."""
        config = _exit_config(small_config, ExitDetector.FULL_LIST, [0.0, 0.3, 0.6, 0.9], codewords=64)
        values = [r.i_e for r in run_exit(config, settings)]
        for lower, higher in zip(values, values[1:]):
            assert higher >= lower - 0.01

    def test_joint_map_detector(self, small_config, settings):
        """Test the SDR-based detector produces a measurement."""
        config = _exit_config(small_config, ExitDetector.JOINT_MAP_SDR, [0.5])
        record = run_exit(config, settings)[0]
        assert record.codewords == 32
        assert 0.0 <= record.i_e <= 1.0

    @pytest.mark.slow
    def test_code_anchoring_lifts_extrinsic_information(self, small_config, settings):
        """Without priors the joint MAP-SDR detector beats the full-list detector by 0.05 bits."""
        joint = run_exit(_exit_config(small_config, ExitDetector.JOINT_MAP_SDR, [0.0], 64, snr_db=2.0), settings)
        full = run_exit(_exit_config(small_config, ExitDetector.FULL_LIST, [0.0], 64, snr_db=2.0), settings)
        assert joint[0].i_e >= full[0].i_e + 0.05
