"""CSV persistence for sweep rows.

Fixed column order; floats carry 17 significant digits, so a parse /
serialize round trip is byte-identical.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

from .capability import SweepRow

COLUMNS = (
    "experiment_id",
    "criterion",
    "d_a",
    "d_b",
    "k",
    "n_samples",
    "n_detected",
    "p_hat",
    "ci_low",
    "ci_high",
    "master_seed",
    "bound_value",
    "wall_time_s",
    "error",
)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _row_record(row: SweepRow) -> list[str]:
    return [
        row.experiment_id,
        row.criterion,
        str(row.d_a),
        str(row.d_b),
        str(row.k),
        str(row.n_samples),
        str(row.n_detected),
        _fmt(row.p_hat),
        _fmt(row.ci_low),
        _fmt(row.ci_high),
        str(row.master_seed),
        "" if row.bound_value is None else _fmt(row.bound_value),
        _fmt(row.wall_time_s),
        row.error,
    ]


def serialize_rows(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow(_row_record(row))
    return buf.getvalue()


def write_rows(path: str | Path, rows: list[SweepRow]) -> None:
    Path(path).write_text(serialize_rows(rows))


def _parse_float(s: str) -> float:
    return float(s) if s else math.nan


def parse_rows(text: str) -> list[SweepRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != COLUMNS:
        raise ValueError(f"bad CSV header: expected {','.join(COLUMNS)}")
    rows = []
    for rec in reader:
        if len(rec) != len(COLUMNS):
            raise ValueError(f"bad CSV record length {len(rec)}: {rec}")
        rows.append(
            SweepRow(
                experiment_id=rec[0],
                criterion=rec[1],
                d_a=int(rec[2]),
                d_b=int(rec[3]),
                k=int(rec[4]),
                n_samples=int(rec[5]),
                n_detected=int(rec[6]),
                p_hat=_parse_float(rec[7]),
                ci_low=_parse_float(rec[8]),
                ci_high=_parse_float(rec[9]),
                master_seed=int(rec[10]),
                bound_value=float(rec[11]) if rec[11] else None,
                wall_time_s=_parse_float(rec[12]),
                error=rec[13],
            )
        )
    return rows


def read_rows(path: str | Path) -> list[SweepRow]:
    return parse_rows(Path(path).read_text())
