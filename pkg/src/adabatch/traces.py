"""Run traces and their CSV / JSON-sidecar serialization.

The CSV column set is a fixed contract; downstream comparison tooling
refuses files with a different header.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import List, Optional

CSV_COLUMNS = [
    "iter", "samples", "epoch", "f", "grad_norm_full", "grad_norm_batch",
    "step_size", "batch_size", "inner_lhs", "inner_rhs", "orth_lhs",
    "orth_rhs", "status",
]

STATUS_RUNNING = "running"
STATUS_BUDGET = "budget_exhausted"
STATUS_CONVERGED = "converged"
STATUS_NONFINITE = "nonfinite"
STATUS_LS_DIVERGED = "line_search_diverged"
STATUS_CAP = "cap_reached"
OK_STATUSES = (STATUS_BUDGET, STATUS_CONVERGED)


@dataclass
class TraceRow:
    iteration: int
    samples: int
    epoch: float
    f: Optional[float]
    grad_norm_full: Optional[float]
    grad_norm_batch: Optional[float]
    step_size: Optional[float]
    batch_size: int
    inner_lhs: Optional[float] = None
    inner_rhs: Optional[float] = None
    orth_lhs: Optional[float] = None
    orth_rhs: Optional[float] = None
    status: str = STATUS_RUNNING
    wall_nanos: int = 0  # informational only, never serialized


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _parse(value: str):
    if value == "":
        return None
    return float(value)


@dataclass
class RunTrace:
    header: dict
    rows: List[TraceRow] = field(default_factory=list)
    final_weights: Optional[object] = None  # ndarray; not part of the CSV contract

    @property
    def status(self) -> str:
        return self.rows[-1].status if self.rows else "empty"

    @property
    def ok(self) -> bool:
        return self.status in OK_STATUSES

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow([
                r.iteration, r.samples, _fmt(r.epoch), _fmt(r.f),
                _fmt(r.grad_norm_full), _fmt(r.grad_norm_batch),
                _fmt(r.step_size), r.batch_size, _fmt(r.inner_lhs),
                _fmt(r.inner_rhs), _fmt(r.orth_lhs), _fmt(r.orth_rhs),
                r.status,
            ])
        return buf.getvalue()

    def write(self, csv_path: str, sidecar_path: Optional[str] = None) -> None:
        with open(csv_path, "w") as fh:
            fh.write(self.to_csv_text())
        if sidecar_path is not None:
            with open(sidecar_path, "w") as fh:
                json.dump(self.header, fh, indent=2, sort_keys=True)
                fh.write("\n")

    def column(self, name: str) -> list:
        return [getattr(r, _FIELD_BY_COLUMN[name]) for r in self.rows]


_FIELD_BY_COLUMN = {
    "iter": "iteration", "samples": "samples", "epoch": "epoch", "f": "f",
    "grad_norm_full": "grad_norm_full", "grad_norm_batch": "grad_norm_batch",
    "step_size": "step_size", "batch_size": "batch_size",
    "inner_lhs": "inner_lhs", "inner_rhs": "inner_rhs",
    "orth_lhs": "orth_lhs", "orth_rhs": "orth_rhs", "status": "status",
}


class TraceSchemaError(Exception):
    pass


def read_csv(path: str) -> RunTrace:
    """Load a trace CSV; the sidecar (if present) becomes the header."""
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_COLUMNS:
            raise TraceSchemaError(f"{path}: unexpected columns {header}")
        rows = []
        for rec in reader:
            rows.append(TraceRow(
                iteration=int(rec[0]), samples=int(rec[1]),
                epoch=float(rec[2]), f=_parse(rec[3]),
                grad_norm_full=_parse(rec[4]), grad_norm_batch=_parse(rec[5]),
                step_size=_parse(rec[6]), batch_size=int(rec[7]),
                inner_lhs=_parse(rec[8]), inner_rhs=_parse(rec[9]),
                orth_lhs=_parse(rec[10]), orth_rhs=_parse(rec[11]),
                status=rec[12],
            ))
    sidecar = {}
    try:
        with open(path.rsplit(".", 1)[0] + ".json") as fh:
            sidecar = json.load(fh)
    except (OSError, json.JSONDecodeError):
        pass
    return RunTrace(sidecar, rows)
