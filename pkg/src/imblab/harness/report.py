"""Figures and summary tables from aggregated results.

For every (example, paradigm, metric) there is one SVG with a panel per
learner and a line per resampler against log2(IR), plus a CSV of the
plotted points. ``best_combinations.csv`` lists, per metric and IR, the
(resampler, learner) pair with the best mean: smallest for error-type
metrics, largest for F-scores and AUCs (see ``metrics.HIGHER_IS_BETTER``).
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from pathlib import Path

import matplotlib
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from ..errors import NoData
from ..learners.base import LearnerKind
from ..metrics import HIGHER_IS_BETTER, METRIC_NAMES
from ..resample import ResampleKind
from .results import sort_records

FIGURE_CSV_HEADER = ("example", "paradigm", "metric", "learner", "resampler", "ir", "log2_ir", "mean", "stderr")
BEST_HEADER = ("example", "paradigm", "metric", "ir", "resampler", "learner", "mean", "stderr")

_RESAMPLER_ORDER = [r.value for r in ResampleKind]
_LEARNER_ORDER = [k.value for k in LearnerKind]
_STYLE = {
    "Original": ("black", "o"),
    "Under": ("tab:blue", "s"),
    "Smote": ("tab:orange", "^"),
    "Hybrid": ("tab:green", "D"),
}


def _order(values, preferred):
    known = [v for v in preferred if v in values]
    return known + sorted(v for v in values if v not in preferred)


def _metric_order(values):
    return _order(values, list(METRIC_NAMES))


def _fmt(v):
    return repr(float(v)) if isinstance(v, float) else str(v)


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _render_figure(path: Path, title: str, panels: dict, metric: str):
    """``panels``: learner -> resampler -> sorted list of (ir, mean, stderr)."""
    learners = _order(list(panels), _LEARNER_ORDER)
    fig = Figure(figsize=(3.0 * len(learners) + 0.8, 3.4))
    FigureCanvasSVG(fig)
    axes = fig.subplots(1, len(learners), sharey=True, squeeze=False)[0]
    all_irs = sorted({p[0] for lines in panels.values() for pts in lines.values() for p in pts})
    for ax, learner in zip(axes, learners):
        lines = panels[learner]
        for res in _order(list(lines), _RESAMPLER_ORDER):
            pts = lines[res]
            x = [math.log2(p[0]) for p in pts]
            y = [p[1] for p in pts]
            se = [p[2] for p in pts]
            color, marker = _STYLE.get(res, (None, "x"))
            ax.errorbar(x, y, yerr=se, color=color, marker=marker, markersize=4, linewidth=1.2, capsize=2, label=res)
        ax.set_title(learner, fontsize=9)
        ax.set_xticks([math.log2(v) for v in all_irs])
        ax.set_xticklabels([f"{v:g}" for v in all_irs], fontsize=7)
        ax.set_xlabel("IR (log2 scale)", fontsize=8)
        ax.tick_params(axis="y", labelsize=7)
        ax.grid(True, linewidth=0.3, alpha=0.5)
    axes[0].set_ylabel(metric, fontsize=8)
    axes[-1].legend(fontsize=7, loc="best")
    fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})


def best_combinations(records) -> list[tuple]:
    """Rows of ``BEST_HEADER``; ties keep the first candidate in sorted key order."""
    best = {}
    for r in sort_records(records):
        key = (r.example, r.paradigm, r.metric, r.ir)
        higher = HIGHER_IS_BETTER.get(r.metric, False)
        cur = best.get(key)
        if cur is None or (r.mean > cur.mean if higher else r.mean < cur.mean):
            best[key] = r
    rows = []
    for (ex, par, metric, ir), r in best.items():
        rows.append((ex, par, metric, ir, r.resampler, r.learner, r.mean, r.stderr))
    order = {m: i for i, m in enumerate(_metric_order({row[2] for row in rows}))}
    rows.sort(key=lambda row: (row[0], row[1], order[row[2]], row[3]))
    return rows


def render_report(records, out_dir) -> list[Path]:
    """Write figures, their CSVs and ``best_combinations.csv`` under ``out_dir``.

    Figures go to ``out_dir/<paradigm>/<example>_<metric>.svg``. Returns the
    written paths.
    """
    records = list(records)
    if not records:
        raise NoData("no records to report")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    groups = defaultdict(lambda: defaultdict(lambda: defaultdict(list)))
    for r in sort_records(records):
        groups[(r.example, r.paradigm, r.metric)][r.learner][r.resampler].append((r.ir, r.mean, r.stderr))

    written = []
    with matplotlib.rc_context({"svg.hashsalt": "imblab", "svg.fonttype": "none"}):
        for (example, paradigm, metric), panels in sorted(groups.items()):
            sub = out_dir / paradigm
            sub.mkdir(exist_ok=True)
            stem = f"{example}_{metric}"
            svg = sub / f"{stem}.svg"
            _render_figure(svg, f"{example}, {paradigm}: {metric}", panels, metric)
            rows = []
            for learner in _order(list(panels), _LEARNER_ORDER):
                for res in _order(list(panels[learner]), _RESAMPLER_ORDER):
                    for ir, mean, se in panels[learner][res]:
                        rows.append((example, paradigm, metric, learner, res, ir, math.log2(ir), mean, se))
            table = sub / f"{stem}.csv"
            _write_csv(table, FIGURE_CSV_HEADER, rows)
            written += [svg, table]
    best = out_dir / "best_combinations.csv"
    _write_csv(best, BEST_HEADER, best_combinations(records))
    written.append(best)
    return written
