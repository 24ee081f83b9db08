"""
Integration tests for the command-line interface.
"""

import json

import pytest

from jointsdr.coding.alist import read_alist
from jointsdr.core.config import Settings
from jointsdr.harness.results import BER_HEADER, EXIT_HEADER, INFO_HEADER, read_csv
from jointsdr.main import EXIT_OK, EXIT_USAGE, build_parser, run

SMALL_EXPERIMENT = {
    "code": {"nc": 32, "kc": 16, "col_weight": 3, "seed": 11},
    "nt": 2,
    "nr": 2,
    "snr_db": [10.0],
    "receiver": "disjoint-ml-sdr",
    "decoder": "none",
    "max_codewords": 2,
    "max_bit_errors": 1000,
    "seed": 3,
}


@pytest.fixture
def json_config(tmp_path):
    """Small experiment as JSON."""
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps(SMALL_EXPERIMENT))
    return path


@pytest.fixture
def kv_config(tmp_path):
    """Small experiment as key-value lines."""
    path = tmp_path / "experiment.conf"
    path.write_text(
        "# small experiment\n"
        "code.nc = 32\n"
        "code.kc = 16\n"
        "code.seed = 11\n"
        "nt = 2\n"
        "nr = 2\n"
        "snr_db = 10\n"
        "receiver = ml-oracle\n"
        "decoder = bf\n"
        "max_codewords = 2\n"
    )
    return path


def _header(path):
    return path.read_text().splitlines()[0].split(",")


class TestParser:
    """Test argument parsing."""

    def test_subcommands(self):
        """Test each subcommand parses."""
        parser = build_parser()
        assert parser.parse_args(["ber", "--out", "x.csv"]).command == "ber"
        assert parser.parse_args(["exit", "--out", "x.csv", "--snr", "2,4"]).snr == [2.0, 4.0]
        assert parser.parse_args(["oracle-check"]).seed == 0
        assert parser.parse_args(["gen-code", "--nc", "64", "--out", "c.alist"]).nc == 64

    def test_out_required(self):
        """Test --out is mandatory for experiments."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["ber"])

    def test_unknown_receiver(self):
        """Test receiver choices."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["ber", "--out", "x.csv", "--receiver", "zero-forcing"])


class TestBerCommand:
    """Test the ber subcommand."""

    def test_json_config(self, json_config, tmp_path, settings, capsys):
        """Test the CSV and its info companion."""
        out = tmp_path / "results" / "ber.csv"
        assert run(["ber", "--config", str(json_config), "--out", str(out)], settings) == EXIT_OK
        assert _header(out) == BER_HEADER
        info = tmp_path / "results" / "ber.info.csv"
        assert _header(info) == INFO_HEADER
        rows = read_csv(out)
        assert len(rows) == 1
        assert rows[0]["codewords"] == "2"
        assert rows[0]["bits"] == "64"
        assert "wrote" in capsys.readouterr().out

    def test_key_value_config_with_overrides(self, kv_config, tmp_path, settings):
        """Test CLI flags replace file values."""
        out = tmp_path / "ber.csv"
        status = run(["ber", "--config", str(kv_config), "--snr", "8,12", "--seed", "9", "--out", str(out)], settings)
        assert status == EXIT_OK
        assert [row["snr_db"] for row in read_csv(out)] == ["8.0", "12.0"]

    def test_missing_config(self, tmp_path, settings, capsys):
        """Test a missing config file is a usage error."""
        status = run(["ber", "--config", str(tmp_path / "absent.json"), "--out", str(tmp_path / "b.csv")], settings)
        assert status == EXIT_USAGE
        assert "not found" in capsys.readouterr().err

    def test_invalid_config(self, tmp_path, settings, capsys):
        """Test validation errors are usage errors."""
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({**SMALL_EXPERIMENT, "nt": 3}))
        assert run(["ber", "--config", str(path), "--out", str(tmp_path / "b.csv")], settings) == EXIT_USAGE
        assert "invalid configuration" in capsys.readouterr().err

    def test_metrics_textfile(self, json_config, tmp_path):
        """Test metrics are exported after a run."""
        metrics = tmp_path / "metrics.prom"
        settings = Settings(workers=1, metrics_textfile=metrics)
        assert run(["ber", "--config", str(json_config), "--out", str(tmp_path / "b.csv")], settings) == EXIT_OK
        assert "jointsdr_codewords_total" in metrics.read_text()

    def test_dump_sdpa_flag(self, json_config, tmp_path, settings):
        """Test the first SDP is written when requested."""
        dump = tmp_path / "first.dat-s"
        argv = ["ber", "--config", str(json_config), "--out", str(tmp_path / "b.csv"), "--dump-sdpa", str(dump)]
        assert run(argv, settings) == EXIT_OK
        assert dump.read_text().startswith("* jointsdr disjoint problem: K=8 n=5")


class TestExitCommand:
    """Test the exit subcommand."""

    def test_exit_csv(self, tmp_path, settings):
        """Test the EXIT CSV layout."""
        config = {
            **SMALL_EXPERIMENT,
            "exit": {"ia_grid": [0.0, 0.5], "codewords": 32, "detector": "full-list", "bins": 10},
        }
        path = tmp_path / "exit.json"
        path.write_text(json.dumps(config))
        out = tmp_path / "exit.csv"
        assert run(["exit", "--config", str(path), "--out", str(out)], settings) == EXIT_OK
        assert _header(out) == EXIT_HEADER
        assert [row["i_a"] for row in read_csv(out)] == ["0.0", "0.5"]


class TestGenCodeCommand:
    """Test the gen-code subcommand."""

    def test_writes_alist(self, tmp_path, settings):
        """Test a generated code can be read back."""
        out = tmp_path / "code.alist"
        argv = ["gen-code", "--nc", "24", "--kc", "12", "--col-weight", "3", "--seed", "2", "--out", str(out)]
        assert run(argv, settings) == EXIT_OK
        code = read_alist(out)
        assert (code.nc, code.m) == (24, 12)

    def test_generated_code_drives_ber(self, tmp_path, settings):
        """Test an alist path in the config is used by the harness."""
        alist = tmp_path / "code.alist"
        assert run(["gen-code", "--nc", "32", "--kc", "16", "--seed", "4", "--out", str(alist)], settings) == EXIT_OK
        config = {**SMALL_EXPERIMENT, "code": {"alist": str(alist)}}
        path = tmp_path / "experiment.json"
        path.write_text(json.dumps(config))
        out = tmp_path / "ber.csv"
        assert run(["ber", "--config", str(path), "--out", str(out)], settings) == EXIT_OK
        assert read_csv(out)[0]["bits"] == "64"

    def test_infeasible_profile(self, tmp_path, settings):
        """Test construction errors are usage errors."""
        argv = ["gen-code", "--nc", "10", "--kc", "3", "--out", str(tmp_path / "c.alist")]
        assert run(argv, settings) == EXIT_USAGE


@pytest.mark.slow
class TestOracleCheckCommand:
    """Test the oracle-check subcommand."""

    def test_all_checks_pass(self, settings, capsys):
        """Test every property suite passes."""
        assert run(["oracle-check", "--seed", "0"], settings) == EXIT_OK
        out = capsys.readouterr().out
        assert out.count("PASS") == 4
        assert "FAIL" not in out
