"""Result rows and their text, CSV and json-lines renderings."""

from __future__ import annotations

import csv
import io
import json
import sys
from dataclasses import asdict, dataclass

import numpy as np

from .errors import HolonomyError

__all__ = ["CSV_COLUMNS", "OutputError", "ReportRow", "emit", "read_csv", "render"]

CSV_COLUMNS = ("scenario", "method", "phase_rad", "trace_re", "trace_im", "visibility",
               "max_residual", "steps", "walltime_s")


class OutputError(HolonomyError):
    exit_code = 1


@dataclass(frozen=True)
class ReportRow:
    scenario: str
    method: str
    phase_rad: float
    trace_re: float
    trace_im: float
    visibility: float
    max_residual: float
    steps: int
    walltime_s: float

    def __post_init__(self):
        if not -np.pi < self.phase_rad <= np.pi:
            raise ValueError(f"phase {self.phase_rad} outside (-pi, pi]")
        if self.max_residual < 0 or self.walltime_s < 0:
            raise ValueError("residuals and wall time must be non-negative")


def _g(x: float) -> str:
    return format(float(x), ".17g")


def _csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([r.scenario, r.method, _g(r.phase_rad), _g(r.trace_re), _g(r.trace_im),
                    _g(r.visibility), _g(r.max_residual), str(int(r.steps)), _g(r.walltime_s)])
    return buf.getvalue()


def _jsonl(rows) -> str:
    return "".join(json.dumps(asdict(r)) + "\n" for r in rows)


def _text(rows, degrees: bool) -> str:
    unit = "phase_deg" if degrees else "phase_rad"
    head = ["scenario", "method", unit, "trace", "visibility", "max_residual", "steps", "walltime_s"]
    body = []
    for r in rows:
        ph = np.degrees(r.phase_rad) if degrees else r.phase_rad
        sign = "-" if r.trace_im < 0 else "+"
        body.append([r.scenario, r.method, f"{ph:.10f}", f"{r.trace_re:.8f}{sign}{abs(r.trace_im):.8f}i",
                     f"{r.visibility:.8f}", f"{r.max_residual:.3e}", str(r.steps), f"{r.walltime_s:.3f}"])
    widths = [max(len(x) for x in col) for col in zip(head, *body)]
    lines = ["  ".join(x.ljust(w) for x, w in zip(line, widths)).rstrip() for line in [head] + body]
    return "\n".join(lines) + "\n"


def render(rows, fmt: str, degrees: bool = False) -> str:
    if fmt == "csv":
        return _csv(rows)
    if fmt == "json-lines":
        return _jsonl(rows)
    if fmt == "text":
        return _text(rows, degrees)
    raise ValueError(f"unknown output format {fmt!r}")


def emit(rows, fmt: str = "text", path: str = "-", degrees: bool = False) -> None:
    """Write rows to ``path`` (``-`` for standard output)."""
    text = render(list(rows), fmt, degrees)
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e.strerror or e}") from None


def read_csv(text: str) -> list:
    """Parse CSV produced by :func:`emit` back into rows."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != CSV_COLUMNS:
        raise ValueError(f"unexpected header {header}")
    out = []
    for rec in reader:
        out.append(ReportRow(rec[0], rec[1], *(float(x) for x in rec[2:7]), int(rec[7]), float(rec[8])))
    return out
