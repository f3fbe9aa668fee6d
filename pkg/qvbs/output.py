"""
QVBS v1 - Report writers

CSV rows come from one row model, columns in model field order, floats
with 17 significant digits. List-valued fields are joined with ';'.
JSON reports are the full RunReport.
"""

import json
import logging
from pathlib import Path
from typing import Sequence

import pandas as pd
from pydantic import BaseModel

from .models import CheckRow, CorrelatorRow, RunReport, SpectrumRow

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
ROW_MODELS: dict[str, type[BaseModel]] = {
    "spectrum": SpectrumRow,
    "correlate": CorrelatorRow,
    "verify": CheckRow,
}


def _cell(value):
    if isinstance(value, list):
        return ";".join(FLOAT_FORMAT % item if isinstance(item, float) else str(item) for item in value)
    return value


def rows_frame(rows: Sequence[BaseModel], model: type[BaseModel]) -> pd.DataFrame:
    """DataFrame with one column per model field, in declaration order."""
    columns = list(model.model_fields)
    records = [{name: _cell(value) for name, value in row.model_dump().items()} for row in rows]
    return pd.DataFrame(records, columns=columns)


def write_csv(rows: Sequence[BaseModel], model: type[BaseModel], path: Path) -> Path:
    frame = rows_frame(rows, model)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def write_json(report: RunReport, path: Path) -> Path:
    """Non-finite floats are written as the constants Infinity, -Infinity and NaN."""
    path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(f"Wrote report to {path}")
    return path


def write_report(report: RunReport, path: Path, output_format: str) -> Path:
    """Write the rows of the report's command as CSV, or the whole report as JSON."""
    path.parent.mkdir(parents=True, exist_ok=True)
    if output_format == "json":
        return write_json(report, path)
    return write_csv(report.rows(), ROW_MODELS[report.command], path)


def report_schema() -> dict:
    return RunReport.model_json_schema()


def write_schema(path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report_schema(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
