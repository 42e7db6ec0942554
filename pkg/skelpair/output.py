"""
Report serialization.

Every report is a SkelModel; JSON output is its aliased dump with sorted keys,
CSV output uses the report's csv_header()/csv_rows(). Both are byte-stable for
equal reports.

Usage:
    from skelpair.output import emit_report

    emit_report(report, "csv", "table.csv")
    emit_report(report, "json", None)   # stdout
"""

from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path
from typing import Literal

import logfire

from skelpair.models import SkelModel

type OutputFormat = Literal["json", "csv"]


def render_json(report: SkelModel) -> str:
    data = report.model_dump(mode="json", by_alias=True)
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def render_csv(report: SkelModel) -> str:
    """
    Raises:
        ValueError: the report type has no tabular form
    """
    header = getattr(report, "csv_header", None)
    rows = getattr(report, "csv_rows", None)
    if header is None or rows is None:
        raise ValueError(f"{type(report).__name__} has no CSV form")
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header())
    writer.writerows(rows())
    return buffer.getvalue()


def emit_report(report: SkelModel, format: OutputFormat = "json", path: str | Path | None = None) -> None:
    """Write the report to `path`, or to stdout when no path is given."""
    text = render_csv(report) if format == "csv" else render_json(report)
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    Path(path).write_text(text, encoding="utf-8")
    logfire.info(f"wrote {type(report).__name__} to {path}")
