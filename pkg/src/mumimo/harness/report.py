"""CSV / JSON serialization of :class:`RateReport`."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, fields
from pathlib import Path

from ..errors import InvalidArguments, IoFailure
from .montecarlo import AsymptoticRow, InfeasibleCell, RateReport, RateRow

RATE_COLUMNS = tuple(f.name for f in fields(RateRow))
ASYMPTOTIC_COLUMNS = tuple(f.name for f in fields(AsymptoticRow))
_FLOAT_FIELDS = {"snr_db", "mean_rate", "std_rate", "predicted_rate"}
_INT_FIELDS = {"K", "trials", "seed"}


def fmt_float(x: float) -> str:
    return f"{x:.9g}"


def _cell(name: str, value) -> str:
    return fmt_float(value) if name in _FLOAT_FIELDS else str(value)


def asymptotic_path(path) -> Path:
    """``results.csv`` -> ``results.asymptotic.csv``."""
    p = Path(path)
    return p.with_name(f"{p.stem}.asymptotic{p.suffix or '.csv'}")


def to_csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_cell(c, getattr(r, c)) for c in columns])
    return buf.getvalue()


def _rounded(record) -> dict:
    return {k: float(fmt_float(v)) if k in _FLOAT_FIELDS else v for k, v in asdict(record).items()}


def to_json(report: RateReport) -> str:
    payload = {
        "rows": [_rounded(r) for r in report.rows],
        "asymptotic_rows": [_rounded(r) for r in report.asymptotic_rows],
        "infeasible": [_rounded(r) for r in report.infeasible],
    }
    return json.dumps(payload, indent=2) + "\n"


def emit_report(report: RateReport, format: str, path) -> None:
    """Write ``report`` to ``path``.

    ``csv`` writes the Monte Carlo rows to ``path`` and the asymptotic rows
    next to it with a ``.asymptotic`` infix; ``json`` writes one file with
    both record lists (plus any infeasible cells).
    """
    try:
        if format == "csv":
            _write(path, to_csv(report.rows, RATE_COLUMNS))
            _write(asymptotic_path(path), to_csv(report.asymptotic_rows, ASYMPTOTIC_COLUMNS))
        elif format == "json":
            _write(path, to_json(report))
        else:
            raise InvalidArguments(f"unknown report format {format!r}")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def _write(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _parse(record_type, raw: dict):
    kwargs = {}
    for f in fields(record_type):
        value = raw[f.name]
        if f.name in _FLOAT_FIELDS:
            value = float(value)
        elif f.name in _INT_FIELDS:
            value = int(value)
        kwargs[f.name] = value
    return record_type(**kwargs)


def read_report(path, format: str = "csv") -> RateReport:
    """Parse a report written by :func:`emit_report`."""
    if format == "json":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return RateReport(
            [_parse(RateRow, r) for r in data["rows"]],
            [_parse(AsymptoticRow, r) for r in data["asymptotic_rows"]],
            [_parse(InfeasibleCell, r) for r in data.get("infeasible", [])],
        )
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [_parse(RateRow, r) for r in csv.DictReader(fh)]
    asym = []
    apath = asymptotic_path(path)
    if apath.exists():
        with open(apath, encoding="utf-8", newline="") as fh:
            asym = [_parse(AsymptoticRow, r) for r in csv.DictReader(fh)]
    return RateReport(rows, asym)
