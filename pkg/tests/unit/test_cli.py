"""
QVBS v1 - Command line tests

Runs the click commands in-process and checks exit codes and files.

Run with:
    pytest tests/unit/test_cli.py
"""

import json
import os

import pandas as pd
import pytest
from click.testing import CliRunner

from qvbs import __version__
from qvbs.cli import cli
from qvbs.models import CheckRow, RunReport


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(cli, ["--env-file", "missing.env", *args])


@pytest.mark.unit
class TestSpectrumCommand:
    """qvbs spectrum"""

    def test_spin1_csv(self, runner, tmp_path):
        """Test eigenvalues 3, -1 with degeneracies 1, 3."""
        path = tmp_path / "spectrum.csv"
        result = invoke(runner, "spectrum", "--spin", "1", "--q", "1", "-o", str(path))
        assert result.exit_code == 0, result.output
        frame = pd.read_csv(path)
        assert frame["eigenvalues"][0] == "3;-1"
        assert frame["degeneracies"][0] == "1;3"
        assert bool(frame["passed"][0])

    def test_json_grid(self, runner, tmp_path):
        """Test one row per q value in a JSON report."""
        path = tmp_path / "spectrum.json"
        result = invoke(runner, "spectrum", "--spin", "2", "--q-grid", "0.5:2:3:log", "--format", "json", "-o", str(path))
        assert result.exit_code == 0, result.output
        report = RunReport.model_validate_json(path.read_text())
        assert report.passed
        assert report.version == __version__
        assert [row.q for row in report.spectrum] == pytest.approx([0.5, 1.0, 2.0])
        assert all(row.degeneracies == [1, 3, 5] for row in report.spectrum)

    def test_invalid_spin(self, runner, tmp_path):
        """Test that S = 0 is a usage error."""
        result = invoke(runner, "spectrum", "--spin", "0", "--q", "1", "-o", str(tmp_path / "x.csv"))
        assert result.exit_code == 2

    def test_q_and_grid_are_exclusive(self, runner, tmp_path):
        """Test that --q and --q-grid cannot be combined."""
        result = invoke(runner, "spectrum", "--spin", "1", "--q", "1", "--q-grid", "0.5:2:3",
                        "-o", str(tmp_path / "x.csv"))
        assert result.exit_code == 2

    @pytest.mark.parametrize("q", ["0", "-1", "nan"])
    def test_invalid_q(self, runner, tmp_path, q):
        """Test that q must be finite and positive."""
        result = invoke(runner, "spectrum", "--spin", "1", "--q", q, "-o", str(tmp_path / "x.csv"))
        assert result.exit_code == 2

    def test_spin_budget(self, runner, tmp_path):
        """Test that spins above QVBS_MAX_SPIN are refused."""
        result = invoke(runner, "spectrum", "--spin", "7", "--q", "1", "-o", str(tmp_path / "x.csv"))
        assert result.exit_code == 2

    @pytest.mark.parametrize("override", ["bogus=1e-3", "oracle", "oracle=abc", "oracle=-1"])
    def test_bad_tolerance(self, runner, tmp_path, override):
        """Test malformed --tol overrides."""
        result = invoke(runner, "spectrum", "--spin", "1", "--q", "1", "--tol", override, "-o", str(tmp_path / "x.csv"))
        assert result.exit_code == 2

    def test_default_output_dir(self, runner, tmp_path, monkeypatch):
        """Test that QVBS_OUTPUT_DIR places the default file."""
        monkeypatch.setenv("QVBS_OUTPUT_DIR", str(tmp_path))
        result = invoke(runner, "spectrum", "--spin", "1", "--q", "1")
        assert result.exit_code == 0, result.output
        assert (tmp_path / "spectrum.csv").exists()

    def test_env_file(self, runner, tmp_path):
        """Test that --env-file settings reach the run."""
        env_file = tmp_path / "test.env"
        env_file.write_text(f"QVBS_OUTPUT_DIR={tmp_path / 'from_env'}\n")
        try:
            result = runner.invoke(cli, ["--env-file", str(env_file), "spectrum", "--spin", "1", "--q", "1"])
            assert result.exit_code == 0, result.output
            assert (tmp_path / "from_env" / "spectrum.csv").exists()
        finally:
            os.environ.pop("QVBS_OUTPUT_DIR", None)

    def test_version(self, runner):
        """Test --version."""
        result = runner.invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert __version__ in result.output


@pytest.mark.unit
class TestCorrelateCommand:
    """qvbs correlate"""

    def test_thermo_values(self, runner, tmp_path):
        """Test -4 (-1/3)^r at S=1, q=1."""
        path = tmp_path / "correlate.csv"
        result = invoke(runner, "correlate", "--spin", "1", "--q", "1", "--r", "2..4", "-o", str(path))
        assert result.exit_code == 0, result.output
        frame = pd.read_csv(path, float_precision="round_trip")
        assert frame["value"].tolist() == pytest.approx([-4 / 9, 4 / 27, -4 / 81], rel=1e-12)
        assert frame["distance"].tolist() == [1, 2, 3]
        assert set(frame["mode"]) == {"thermo"}

    def test_both_modes_have_gap(self, runner, tmp_path):
        """Test the gap column of finite rows."""
        path = tmp_path / "correlate.csv"
        result = invoke(runner, "correlate", "--spin", "1", "--q", "1", "--mode", "both", "--L", "8",
                        "--r", "2..3", "-o", str(path))
        assert result.exit_code == 0, result.output
        frame = pd.read_csv(path)
        finite = frame[frame["mode"] == "finite"]
        assert len(finite) == 2
        assert finite["gap"].notna().all()
        assert frame[frame["mode"] == "thermo"]["gap"].isna().all()

    def test_separation_below_two(self, runner, tmp_path):
        """Test that r = 1 is a usage error."""
        result = invoke(runner, "correlate", "--spin", "1", "--q", "1", "--pair", "pm", "--r", "1",
                        "-o", str(tmp_path / "x.csv"))
        assert result.exit_code == 2

    @pytest.mark.parametrize("mode", ["finite", "both", "all"])
    def test_separation_beyond_chain(self, runner, tmp_path, mode):
        """Test that r > L in a finite mode is a usage error and writes nothing."""
        path = tmp_path / "x.csv"
        result = invoke(runner, "correlate", "--spin", "1", "--q", "1", "--mode", mode, "--L", "4", "--r", "2..10",
                        "-o", str(path))
        assert result.exit_code == 2
        assert "r <= L" in result.output
        assert not path.exists()

    def test_unreadable_range(self, runner, tmp_path):
        """Test that a malformed --r is a usage error."""
        result = invoke(runner, "correlate", "--spin", "1", "--q", "1", "--r", "4..2", "-o", str(tmp_path / "x.csv"))
        assert result.exit_code == 2

    def test_deterministic_output(self, runner, tmp_path):
        """Test that identical runs write identical bytes."""
        args = ["correlate", "--spin", "2", "--q", "0.5,1.5", "--mode", "all", "--L", "10", "--r", "2..6"]
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        assert invoke(runner, *args, "-o", str(first)).exit_code == 0
        assert invoke(runner, *args, "-o", str(second)).exit_code == 0
        assert first.read_bytes() == second.read_bytes()


@pytest.mark.unit
class TestVerifyCommand:
    """qvbs verify"""

    def test_spin1_passes(self, runner, tmp_path):
        """Test the full oracle suite at S=1 over three q values."""
        path = tmp_path / "verify.json"
        result = invoke(runner, "verify", "--spin", "1", "--q", "0.5,1,2", "--L", "2..4", "--format", "json",
                        "-o", str(path))
        assert result.exit_code == 0, result.output
        report = RunReport.model_validate_json(path.read_text())
        assert report.passed
        assert {row.q for row in report.checks} == {0.5, 1.0, 2.0}

    def test_over_budget_length(self, runner, tmp_path):
        """Test that L=12 at S=2 exceeds the dense-state budget."""
        result = invoke(runner, "verify", "--spin", "2", "--q", "1", "--L", "12", "-o", str(tmp_path / "x.csv"))
        assert result.exit_code == 2

    def test_lowering_grid(self, runner, tmp_path):
        """Test --prop1 at S=1 with n <= 2."""
        path = tmp_path / "lowering.csv"
        result = invoke(runner, "verify", "--prop1", "--spin", "1", "--q", "0.5,1", "--n-max", "2", "-o", str(path))
        assert result.exit_code == 0, result.output
        frame = pd.read_csv(path)
        assert len(frame) == 16
        assert set(frame["check"]) == {"lowering"}

    def test_lowering_grid_spin_limit(self, runner, tmp_path):
        """Test that --prop1 stops at S=3."""
        result = invoke(runner, "verify", "--prop1", "--spin", "4", "--q", "1", "-o", str(tmp_path / "x.csv"))
        assert result.exit_code == 2

    def test_failed_check_exits_one(self, runner, tmp_path, monkeypatch):
        """Test that a failing check is written and exits 1."""

        def failing(point):
            return [CheckRow(check="forced", S=point.S, q=point.q, max_residual=1.0, tolerance=1e-10,
                             passed=False, detail="forced failure")]

        monkeypatch.setattr("qvbs.cli.verify_point", failing)
        path = tmp_path / "verify.csv"
        result = invoke(runner, "verify", "--spin", "1", "--q", "1", "--L", "2", "-o", str(path))
        assert result.exit_code == 1
        assert "forced" in result.output
        frame = pd.read_csv(path)
        assert not frame["passed"].any()


@pytest.mark.unit
class TestSchemaCommand:
    """qvbs schema"""

    def test_writes_schema(self, runner, tmp_path):
        """Test the written JSON Schema."""
        path = tmp_path / "run_report.schema.json"
        result = invoke(runner, "schema", "--output", str(path))
        assert result.exit_code == 0, result.output
        schema = json.loads(path.read_text())
        assert schema["title"] == "RunReport"
        assert "CheckRow" in schema["$defs"]
