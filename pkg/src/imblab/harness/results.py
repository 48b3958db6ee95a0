"""Aggregated result records and their CSV persistence."""

from __future__ import annotations

import csv
import math
from dataclasses import astuple, dataclass
from pathlib import Path

import numpy as np

from ..errors import NoData

HEADER = ("example", "paradigm", "resampler", "learner", "ir", "metric", "mean", "stderr", "rep_count")
FAILURE_HEADER = ("example", "paradigm", "resampler", "learner", "ir", "rep", "error_type", "message")


@dataclass(frozen=True)
class ResultRecord:
    example: str
    paradigm: str
    resampler: str
    learner: str
    ir: float
    metric: str
    mean: float
    stderr: float
    rep_count: int

    def __post_init__(self):
        if not self.stderr >= 0:
            raise ValueError(f"stderr must be >= 0, got {self.stderr}")
        if self.rep_count < 1:
            raise ValueError(f"rep_count must be >= 1, got {self.rep_count}")

    @property
    def key(self):
        return (self.example, self.paradigm, self.resampler, self.learner, self.ir, self.metric)


@dataclass(frozen=True)
class Failure:
    """One repetition of one cell that raised instead of producing metrics."""

    example: str
    paradigm: str
    resampler: str
    learner: str
    ir: float
    rep: int
    error_type: str
    message: str


def aggregate(values) -> tuple[float, float, int]:
    """``(mean, stderr, count)`` with stderr = sample sd / sqrt(count); 0 for constant values."""
    a = np.asarray(values, dtype=float)
    n = a.size
    if n == 0:
        raise NoData("nothing to aggregate")
    if np.all(a == a[0]):
        # exact: the rounded mean of equal values can drift by one ulp
        return float(a[0]), 0.0, n
    mean = float(np.mean(a))
    stderr = float(np.std(a, ddof=1) / math.sqrt(n))
    return mean, stderr, n


def sort_records(records):
    return sorted(records, key=lambda r: r.key)


def _fmt(v) -> str:
    # repr of a Python float is the shortest string that round-trips exactly
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def write_results(records, path) -> Path:
    """Write records as CSV, sorted on the key columns. Refuses to write an empty set."""
    records = list(records)
    if not records:
        raise NoData("no result records to write")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        for r in sort_records(records):
            w.writerow([_fmt(v) for v in astuple(r)])
    return path


def read_results(path) -> list[ResultRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != HEADER:
        raise ValueError(f"{path}: expected header {','.join(HEADER)}")
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(HEADER):
            raise ValueError(f"{path}:{lineno}: expected {len(HEADER)} columns, got {len(row)}")
        ex, par, res, lrn, ir, metric, mean, se, count = row
        out.append(ResultRecord(ex, par, res, lrn, float(ir), metric, float(mean), float(se), int(count)))
    return out


def write_failures(failures, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = sorted(astuple(f) for f in failures)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FAILURE_HEADER)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_failures(path) -> list[Failure]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    out = []
    for row in rows[1:]:
        ex, par, res, lrn, ir, rep, et, msg = row
        out.append(Failure(ex, par, res, lrn, float(ir), int(rep), et, msg))
    return out
