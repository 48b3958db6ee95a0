"""Evaluation metrics for binary predictions and scores.

Class 0 is the "negative" (minority) class throughout, so a false positive
is a class-0 point labelled 1 and the type I error is ``FP / (TN + FP)``.
Conditional rates that are undefined because a class is absent are returned
as ``None``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.stats import rankdata

from .errors import EmptyInput, InvalidLabel, LengthMismatch, MissingClass
from .paradigms import ThresholdRule, classify

# persisted metric names, and whether larger is better
METRIC_NAMES = ("risk", "type1", "type2", "cost", "f0", "f1", "roc_auc", "pr_auc0", "pr_auc1")
HIGHER_IS_BETTER = {
    "risk": False,
    "type1": False,
    "type2": False,
    "cost": False,
    "f0": True,
    "f1": True,
    "roc_auc": True,
    "pr_auc0": True,
    "pr_auc1": True,
}


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        for name in ("tp", "fp", "fn", "tn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def n0(self) -> int:
        return self.tn + self.fp

    @property
    def n1(self) -> int:
        return self.tp + self.fn

    @property
    def pi0_hat(self) -> Fraction:
        return Fraction(self.n0, self.total)

    @property
    def pi1_hat(self) -> Fraction:
        return Fraction(self.n1, self.total)


def _labels(v, name) -> np.ndarray:
    a = np.asarray(v)
    if a.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if a.size and not np.all((a == 0) | (a == 1)):
        raise InvalidLabel(f"{name} must only contain 0 and 1")
    return a.astype(bool)


def confusion(y_true, y_pred) -> ConfusionMatrix:
    t = _labels(y_true, "y_true")
    p = _labels(y_pred, "y_pred")
    if t.size != p.size:
        raise LengthMismatch(f"{t.size} labels vs {p.size} predictions")
    if t.size == 0:
        raise EmptyInput("no labels to compare")
    tp = int(np.count_nonzero(t & p))
    fp = int(np.count_nonzero(~t & p))
    fn = int(np.count_nonzero(t & ~p))
    return ConfusionMatrix(tp, fp, fn, t.size - tp - fp - fn)


def error_rates(cm: ConfusionMatrix, exact: bool = False):
    """``(risk, type1, type2)``; a rate is ``None`` when its class is absent.

    With ``exact=True`` the values are ``Fraction`` objects.
    """
    if cm.total == 0:
        raise EmptyInput("empty confusion matrix")
    num = Fraction if exact else (lambda a, b: a / b)
    risk = num(cm.fp + cm.fn, cm.total)
    type1 = num(cm.fp, cm.n0) if cm.n0 else None
    type2 = num(cm.fn, cm.n1) if cm.n1 else None
    return risk, type1, type2


def cost(cm: ConfusionMatrix, c0: float, c1: float) -> float:
    """Empirical weighted error ``C0 pi0 R0 + C1 pi1 R1``, i.e. ``(C0 FP + C1 FN) / n``."""
    if cm.n0 == 0 or cm.n1 == 0:
        raise MissingClass("cost needs both classes present")
    return (c0 * cm.fp + c1 * cm.fn) / cm.total


def f_score(cm: ConfusionMatrix, positive_class: int = 1) -> float:
    """Harmonic mean of precision and recall for ``positive_class``; 0 when either is undefined or 0."""
    if positive_class == 1:
        hit, miss, false_alarm = cm.tp, cm.fn, cm.fp
    elif positive_class == 0:
        hit, miss, false_alarm = cm.tn, cm.fp, cm.fn
    else:
        raise InvalidLabel(f"positive_class must be 0 or 1, got {positive_class}")
    if hit == 0:
        return 0.0
    # 2PR/(P+R) with P = hit/(hit+false_alarm), R = hit/(hit+miss)
    return 2 * hit / (2 * hit + miss + false_alarm)


def _check_scored(scores, y_true):
    s = np.asarray(scores, dtype=float)
    y = _labels(y_true, "y_true")
    if s.ndim != 1 or s.size != y.size:
        raise LengthMismatch(f"{s.size} scores vs {y.size} labels")
    return s, y


def roc_auc(scores, y_true) -> float:
    """P(score of a random class-1 point > score of a random class-0 point), ties count 1/2."""
    s, y = _check_scored(scores, y_true)
    n1 = int(y.sum())
    n0 = y.size - n1
    if n0 == 0 or n1 == 0:
        raise MissingClass("ROC-AUC needs both classes present")
    ranks = rankdata(s)  # average ranks for ties
    u = ranks[y].sum() - n1 * (n1 + 1) / 2.0
    return float(u / (n0 * n1))


def pr_auc(scores, y_true, positive_class: int = 1) -> float:
    """Average precision: area under the precision-recall step curve.

    Points are ranked by decreasing score (by increasing score when
    ``positive_class`` is 0). At every distinct threshold where recall grows,
    the recall increment is weighted by the precision at that threshold.
    """
    s, y = _check_scored(scores, y_true)
    if positive_class == 0:
        s, pos = -s, ~y
    elif positive_class == 1:
        pos = y
    else:
        raise InvalidLabel(f"positive_class must be 0 or 1, got {positive_class}")
    n_pos = int(pos.sum())
    if n_pos == 0:
        raise MissingClass(f"PR-AUC needs class {positive_class} present")
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    tp = np.cumsum(pos[order])
    # last index of each block of tied scores
    ends = np.flatnonzero(np.append(s_sorted[1:] != s_sorted[:-1], True))
    tp_at = tp[ends]
    precision = tp_at / (ends + 1.0)
    recall_step = np.diff(np.concatenate([[0], tp_at])) / n_pos
    return float(np.sum(recall_step * precision))


@dataclass(frozen=True)
class MetricsReport:
    confusion: ConfusionMatrix
    risk: float
    type1: float | None
    type2: float | None
    cost: float
    f0: float
    f1: float
    roc_auc: float
    pr_auc0: float
    pr_auc1: float

    @property
    def pi0_hat(self) -> Fraction:
        return self.confusion.pi0_hat

    @property
    def pi1_hat(self) -> Fraction:
        return self.confusion.pi1_hat

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in METRIC_NAMES}


def full_report(scores, rule: ThresholdRule, y_true, c0: float = 1.0, c1: float = 1.0) -> MetricsReport:
    """Threshold ``scores`` with ``rule`` and compute every metric against ``y_true``."""
    s, y = _check_scored(scores, y_true)
    cm = confusion(y, classify(s, rule))
    risk, type1, type2 = error_rates(cm)
    return MetricsReport(
        confusion=cm,
        risk=risk,
        type1=type1,
        type2=type2,
        cost=cost(cm, c0, c1),
        f0=f_score(cm, 0),
        f1=f_score(cm, 1),
        roc_auc=roc_auc(s, y),
        pr_auc0=pr_auc(s, y, 0),
        pr_auc1=pr_auc(s, y, 1),
    )
