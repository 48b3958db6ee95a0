"""Turning scores into labels under the CC, CS and NP objectives.

CC and CS use fixed cutoffs on the estimated posterior. NP picks an order
statistic of held-out class-0 scores so that the type I error exceeds
``alpha`` with probability at most ``delta``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gammaln

from .datagen import LabeledDataset
from .errors import SampleTooSmall, WrongParadigm


class ParadigmKind(enum.Enum):
    CC = "CC"
    CS = "CS"
    NP = "NP"

    @classmethod
    def parse(cls, value) -> "ParadigmKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise ValueError(f"unknown paradigm {value!r}; expected CC, CS or NP") from None


@dataclass(frozen=True)
class ParadigmSpec:
    """One classification objective.

    For CS, ``cost0``/``cost1`` may be left as ``None``, meaning the harness
    fills them in per imbalance ratio (``cost0 = IR``, ``cost1 = 1``).
    """

    tag: ParadigmKind
    cost0: float | None = None
    cost1: float | None = None
    alpha: float = 0.05
    delta: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "tag", ParadigmKind.parse(self.tag))
        if self.tag is ParadigmKind.CS:
            for name in ("cost0", "cost1"):
                c = getattr(self, name)
                if c is not None and not c > 0:
                    raise ValueError(f"CS {name} must be > 0, got {c}")
            if (self.cost0 is None) != (self.cost1 is None):
                raise ValueError("CS costs must be given together or not at all")
        if self.tag is ParadigmKind.NP:
            if not 0 < self.alpha < 1:
                raise ValueError(f"NP alpha must lie in (0, 1), got {self.alpha}")
            if not 0 < self.delta < 1:
                raise ValueError(f"NP delta must lie in (0, 1), got {self.delta}")

    @classmethod
    def cc(cls) -> "ParadigmSpec":
        return cls(ParadigmKind.CC)

    @classmethod
    def cs(cls, cost0: float | None = None, cost1: float | None = None) -> "ParadigmSpec":
        return cls(ParadigmKind.CS, cost0=cost0, cost1=cost1)

    @classmethod
    def np(cls, alpha: float = 0.05, delta: float = 0.5) -> "ParadigmSpec":
        return cls(ParadigmKind.NP, alpha=alpha, delta=delta)

    @property
    def has_costs(self) -> bool:
        return self.cost0 is not None

    def with_costs(self, cost0: float, cost1: float) -> "ParadigmSpec":
        return replace(self, cost0=float(cost0), cost1=float(cost1))


class Provenance(enum.Enum):
    Fixed = "Fixed"
    NpOrderStatistic = "NpOrderStatistic"


@dataclass(frozen=True)
class ThresholdRule:
    cutoff: float
    provenance: Provenance = Provenance.Fixed
    np_k: int | None = None
    np_n: int | None = None

    def __post_init__(self):
        if self.provenance is Provenance.NpOrderStatistic:
            if self.np_k is None or self.np_n is None or not 1 <= self.np_k <= self.np_n:
                raise ValueError(f"order-statistic rule needs 1 <= k <= n, got k={self.np_k}, n={self.np_n}")


def fixed_threshold(spec: ParadigmSpec) -> ThresholdRule:
    """Oracle cutoff on the posterior: 1/2 for CC, ``C0 / (C0 + C1)`` for CS."""
    if spec.tag is ParadigmKind.CC:
        return ThresholdRule(0.5)
    if spec.tag is ParadigmKind.CS:
        if not spec.has_costs:
            raise ValueError("CS spec has no costs; resolve them with with_costs() first")
        return ThresholdRule(spec.cost0 / (spec.cost0 + spec.cost1))
    raise WrongParadigm("NP thresholds are calibrated on data; use np_calibrate")


def binomial_upper_tails(n: int, p: float) -> np.ndarray:
    """``log P(Bin(n, p) >= k)`` for ``k = 0..n``, by exact summation in log space."""
    j = np.arange(n + 1)
    log_terms = gammaln(n + 1) - gammaln(j + 1) - gammaln(n - j + 1) + j * np.log(p) + (n - j) * np.log1p(-p)
    # suffix log-sum-exp
    return np.logaddexp.accumulate(log_terms[::-1])[::-1]


def np_order_statistic_rank(n: int, alpha: float = 0.05, delta: float = 0.5) -> int:
    """Smallest rank ``k`` with ``P(Bin(n, 1 - alpha) >= k) <= delta``.

    Thresholding at the ``k``-th smallest of ``n`` held-out class-0 scores
    then gives type I error above ``alpha`` with probability at most
    ``delta``.

    Raises
    ------
    SampleTooSmall
        If even ``k = n`` fails, i.e. ``(1 - alpha)^n > delta``.
    """
    n = int(n)
    if n < 1:
        raise SampleTooSmall(f"need at least one held-out class-0 point, got {n}")
    if not (0 < alpha < 1 and 0 < delta < 1):
        raise ValueError(f"alpha and delta must lie in (0, 1), got {alpha}, {delta}")
    log_tail = binomial_upper_tails(n, 1.0 - alpha)[1:]  # k = 1..n
    ok = np.flatnonzero(log_tail <= np.log(delta))
    if ok.size == 0:
        raise SampleTooSmall(
            f"(1-alpha)^n = {(1 - alpha) ** n:.4g} > delta = {delta} with n = {n}; more held-out class-0 points needed"
        )
    return int(ok[0]) + 1


def np_threshold(heldout_scores, alpha: float = 0.05, delta: float = 0.5) -> ThresholdRule:
    """Order-statistic cutoff from scores of held-out class-0 points."""
    s = np.sort(np.asarray(heldout_scores, dtype=float))
    k = np_order_statistic_rank(s.size, alpha, delta)
    return ThresholdRule(float(s[k - 1]), Provenance.NpOrderStatistic, k, int(s.size))


def np_calibrate(model, heldout_class0, alpha: float = 0.05, delta: float = 0.5) -> ThresholdRule:
    """Score held-out class-0 rows with ``model`` and take the umbrella order statistic.

    The rows must not have been used to fit ``model``.
    """
    return np_threshold(model.score(heldout_class0), alpha, delta)


def classify(scores, rule) -> np.ndarray:
    """Label 1 where the score is strictly above the cutoff."""
    cutoff = rule.cutoff if isinstance(rule, ThresholdRule) else float(rule)
    return (np.asarray(scores, dtype=float) > cutoff).astype(np.int8)


def np_split(ds: LabeledDataset, rng: np.random.Generator, fit_fraction: float = 0.5):
    """Split class 0 at random for NP calibration.

    Returns ``(fit_set, heldout_class0)``: the fit set holds a random
    ``fit_fraction`` of the class-0 rows plus every class-1 row; the
    remaining class-0 rows are returned as a feature matrix.
    """
    if not 0 < fit_fraction < 1:
        raise ValueError(f"fit_fraction must lie in (0, 1), got {fit_fraction}")
    x0 = ds.class_rows(0)
    n0 = x0.shape[0]
    n_fit = min(max(int(round(fit_fraction * n0)), 1), n0 - 1) if n0 >= 2 else n0
    perm = rng.permutation(n0)
    fit_rows = x0[np.sort(perm[:n_fit])]
    heldout = x0[np.sort(perm[n_fit:])]
    return LabeledDataset.from_classes(fit_rows, ds.class_rows(1)), heldout
