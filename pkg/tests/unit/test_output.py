"""
QVBS v1 - Report writer tests

Run with:
    pytest tests/unit/test_output.py
"""

import json
import math
from pathlib import Path

import pandas as pd
import pytest

from qvbs.models import CheckRow, CorrelatorRow, RunConfig, RunReport, SpectrumRow
from qvbs.output import report_schema, rows_frame, write_csv, write_json, write_report, write_schema

SHIPPED_SCHEMA = Path(__file__).resolve().parents[2] / "schema" / "run_report.schema.json"


def spectrum_row(**overrides) -> SpectrumRow:
    values = dict(
        S=1,
        q=1.0,
        eigenvalues=[3.0, -1.0],
        degeneracies=[1, 3],
        max_eigenvalue_error=0.0,
        max_eigen_residual=1.5e-17,
        max_eigen_residual_relative=2.0e-16,
        max_intertwiner_residual=0.0,
        max_norm_residual=0.0,
        jacobi_sweeps=2,
        correlation_length=1 / math.log(3),
        passed=True,
    )
    values.update(overrides)
    return SpectrumRow(**values)


def spectrum_report(rows: list[SpectrumRow], output_format: str = "json") -> RunReport:
    config = RunConfig(command="spectrum", spin=1, q_values=[row.q for row in rows],
                       output_format=output_format, output_path=f"spectrum.{output_format}")
    return RunReport(version="1.0.0", command="spectrum", config=config, passed=True, spectrum=rows)


@pytest.mark.unit
class TestCsv:
    """Long-format CSV rows"""

    def test_columns_follow_model_fields(self, tmp_path):
        """Test that the header is the row model's field order."""
        path = write_csv([spectrum_row()], SpectrumRow, tmp_path / "spectrum.csv")
        header, first = path.read_text().splitlines()[:2]
        assert header.split(",") == list(SpectrumRow.model_fields)
        assert first.startswith("1,1,3;-1,1;3,")

    def test_floats_round_trip(self, tmp_path):
        """Test 17 significant digits for floats."""
        row = spectrum_row(correlation_length=1 / math.log(3))
        path = write_csv([row], SpectrumRow, tmp_path / "spectrum.csv")
        frame = pd.read_csv(path, float_precision="round_trip")
        assert frame["correlation_length"][0] == 1 / math.log(3)
        assert frame["max_eigen_residual"][0] == 1.5e-17

    def test_missing_values_are_empty(self, tmp_path):
        """Test that thermo rows leave L and gap empty."""
        row = CorrelatorRow(S=1, q=1.0, pair="zz", mode="thermo", r=2, distance=1, value=-4 / 9)
        path = write_csv([row], CorrelatorRow, tmp_path / "correlate.csv")
        frame = pd.read_csv(path, float_precision="round_trip")
        assert pd.isna(frame["L"][0])
        assert pd.isna(frame["gap"][0])
        assert frame["value"][0] == -4 / 9

    def test_empty_rows_keep_header(self):
        """Test the frame of an empty report."""
        frame = rows_frame([], CheckRow)
        assert list(frame.columns) == list(CheckRow.model_fields)
        assert len(frame) == 0

    def test_deterministic_bytes(self, tmp_path):
        """Test that the same rows give byte-identical files."""
        rows = [spectrum_row(), spectrum_row(q=2.0)]
        first = write_csv(rows, SpectrumRow, tmp_path / "a.csv").read_bytes()
        second = write_csv(rows, SpectrumRow, tmp_path / "b.csv").read_bytes()
        assert first == second
        assert b"\r\n" not in first


@pytest.mark.unit
class TestJson:
    """Full JSON reports"""

    def test_round_trip(self, tmp_path):
        """Test that a written report validates back to the same model."""
        report = spectrum_report([spectrum_row(), spectrum_row(q=0.25)])
        path = write_json(report, tmp_path / "spectrum.json")
        assert RunReport.model_validate_json(path.read_text()) == report

    def test_non_finite_values(self, tmp_path):
        """Test that an overflowed residual is written as Infinity and a missing one as NaN."""
        config = RunConfig(command="verify", spin=1, q_values=[1.0], output_format="json", output_path="verify.json")
        rows = [
            CheckRow(check="states.norm_trace", S=1, q=1.0, L=400, max_residual=math.inf, tolerance=1e-10, passed=False),
            CheckRow(check="forced", S=1, q=1.0, max_residual=math.nan, tolerance=1e-10, passed=False),
        ]
        report = RunReport(version="1.0.0", command="verify", config=config, passed=False, checks=rows)
        path = write_json(report, tmp_path / "verify.json")
        text = path.read_text()
        assert "Infinity" in text and "NaN" in text
        assert json.loads(text)["checks"][0]["max_residual"] == math.inf
        restored = RunReport.model_validate_json(text)
        assert restored.checks[0].max_residual == math.inf
        assert math.isnan(restored.checks[1].max_residual)

    def test_write_report_creates_directories(self, tmp_path):
        """Test nested output paths and the format switch."""
        report = spectrum_report([spectrum_row()], output_format="csv")
        path = write_report(report, tmp_path / "nested" / "dir" / "spectrum.csv", "csv")
        assert path.exists()
        assert path.read_text().startswith("S,q,eigenvalues")

    def test_rows_follow_command(self):
        """Test that rows() picks the list of the report's command."""
        report = spectrum_report([spectrum_row()])
        assert report.rows() == report.spectrum


@pytest.mark.unit
class TestSchema:
    """JSON Schema of the report"""

    def test_schema_lists_row_models(self):
        """Test that every row model is described."""
        schema = report_schema()
        assert {"SpectrumRow", "CorrelatorRow", "CheckRow", "RunConfig"} <= set(schema["$defs"])
        assert schema["title"] == "RunReport"

    def test_write_schema(self, tmp_path):
        """Test the written schema file."""
        path = write_schema(tmp_path / "schema" / "run_report.schema.json")
        assert json.loads(path.read_text()) == json.loads(json.dumps(report_schema()))

    def test_shipped_schema_matches_models(self):
        """Test that schema/run_report.schema.json describes the current report models."""
        shipped = json.loads(SHIPPED_SCHEMA.read_text())
        generated = report_schema()
        assert shipped["title"] == generated["title"]
        assert set(shipped["properties"]) == set(generated["properties"])
        assert set(shipped["required"]) == set(generated["required"])
        assert set(shipped["$defs"]) == set(generated["$defs"])
        for name, definition in generated["$defs"].items():
            assert set(shipped["$defs"][name]["properties"]) == set(definition["properties"]), name
            assert set(shipped["$defs"][name].get("required", [])) == set(definition.get("required", [])), name
