"""Per-iteration trace records and their CSV serialization.

The CSV schema is normative and fixed:

    k,l,step,F,f,f_reg,grad_norm,dist_x,wall_ms,
    calls_gFy,calls_gfy,calls_gFx,calls_gfx,calls_hvp,calls_jvp

Floats are rendered with 17 significant digits, which round-trips IEEE-754
doubles exactly.  Records may carry more in memory (the x vector, eval
counters, backtracking surcharges) than the CSV columns; ``read_trace_csv``
recovers exactly the CSV projection.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..counters import OracleCounters

CSV_HEADER = ["k", "l", "step", "F", "f", "f_reg", "grad_norm", "dist_x",
              "wall_ms", "calls_gFy", "calls_gfy", "calls_gFx", "calls_gfx",
              "calls_hvp", "calls_jvp"]

_COUNTER_COLUMNS = {
    "calls_gFy": "grad_F_y", "calls_gfy": "grad_f_y",
    "calls_gFx": "grad_F_x", "calls_gfx": "grad_f_x",
    "calls_hvp": "hvp_f_yy", "calls_jvp": "jvp_f_xy",
}

X_STORE_LIMIT = 64   # store the full x only up to this dimension
X_HEAD = 8


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


@dataclass
class TraceRecord:
    k: int
    l: int
    step: int
    x: np.ndarray            # full vector, or first X_HEAD coords for large m
    x_norm: float
    F: float
    f: float
    f_reg: float
    grad_norm: float
    dist_x: float            # nan when the optimum is unknown
    wall_ms: float
    counters: dict
    backtracks: int = 0
    dist_y: float = float("nan")

    @staticmethod
    def capture(k, l, step, x, F, f, f_reg, grad_norm, dist_x, wall_ms,
                counters, backtracks=0, dist_y=float("nan")) -> "TraceRecord":
        x = np.asarray(x, dtype=float)
        stored = x.copy() if x.size <= X_STORE_LIMIT else x[:X_HEAD].copy()
        return TraceRecord(k=k, l=l, step=step, x=stored,
                           x_norm=float(np.linalg.norm(x)),
                           F=float(F), f=float(f), f_reg=float(f_reg),
                           grad_norm=float(grad_norm), dist_x=float(dist_x),
                           wall_ms=float(wall_ms), counters=dict(counters),
                           backtracks=backtracks, dist_y=float(dist_y))

    def csv_row(self) -> list:
        row = [str(self.k), str(self.l), str(self.step), _fmt(self.F),
               _fmt(self.f), _fmt(self.f_reg), _fmt(self.grad_norm),
               _fmt(self.dist_x), _fmt(self.wall_ms)]
        row += [str(self.counters.get(src, 0))
                for src in _COUNTER_COLUMNS.values()]
        return row


@dataclass
class Trace:
    records: List[TraceRecord] = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    counters: Optional[OracleCounters] = None

    def append(self, record: TraceRecord):
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    def final(self) -> Optional[TraceRecord]:
        return self.records[-1] if self.records else None


def write_trace_csv(trace: Trace, path) -> None:
    """Write the fixed-schema CSV; an empty trace yields a header-only file."""
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for rec in trace.records:
                writer.writerow(rec.csv_row())
    except OSError as exc:
        raise OSError(f"cannot write trace to {path}: {exc}") from exc


def read_trace_csv(path) -> List[dict]:
    """Read back the CSV projection of a trace, exactly as written.

    Integer columns come back as ints, float columns as floats (17
    significant digits make this lossless for doubles).
    """
    rows = []
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != CSV_HEADER:
                raise ValueError(f"unexpected trace header in {path}: {header}")
            for raw in reader:
                row = dict(zip(CSV_HEADER, raw))
                for key in ("k", "l", "step", "calls_gFy", "calls_gfy",
                            "calls_gFx", "calls_gfx", "calls_hvp", "calls_jvp"):
                    row[key] = int(row[key])
                for key in ("F", "f", "f_reg", "grad_norm", "dist_x", "wall_ms"):
                    row[key] = float(row[key])
                rows.append(row)
    except OSError as exc:
        raise OSError(f"cannot read trace from {path}: {exc}") from exc
    return rows


def csv_projection(trace: Trace) -> List[dict]:
    """In-memory rows in the same typed form ``read_trace_csv`` returns."""
    rows = []
    for rec in trace.records:
        row = {"k": rec.k, "l": rec.l, "step": rec.step, "F": rec.F,
               "f": rec.f, "f_reg": rec.f_reg, "grad_norm": rec.grad_norm,
               "dist_x": rec.dist_x, "wall_ms": rec.wall_ms}
        for col, src in _COUNTER_COLUMNS.items():
            row[col] = int(rec.counters.get(src, 0))
        rows.append(row)
    return rows


def rows_equal(a: List[dict], b: List[dict], ignore=("wall_ms",)) -> bool:
    """Bitwise row comparison treating NaN as equal to NaN.

    Wall-clock fields are excluded by default: they are the one documented
    source of run-to-run variation.
    """
    if len(a) != len(b):
        return False
    for ra, rb in zip(a, b):
        for key in CSV_HEADER:
            if key in ignore:
                continue
            va, vb = ra[key], rb[key]
            if isinstance(va, float) and isinstance(vb, float):
                if math.isnan(va) and math.isnan(vb):
                    continue
                if va != vb:
                    return False
            elif va != vb:
                return False
    return True
