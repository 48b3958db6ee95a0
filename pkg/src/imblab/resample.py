"""Class rebalancing: random under/oversampling, SMOTE and the hybrid scheme.

Class 0 is treated as the minority throughout. Every resampler keeps the
original minority rows; only SMOTE creates new points.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .datagen import LabeledDataset
from .errors import DegenerateMinority, EmptyClass

__all__ = [
    "ResampleKind",
    "GapMode",
    "SmoteParams",
    "SmoteNeighborWarning",
    "undersample",
    "oversample_random",
    "smote",
    "hybrid",
    "hybrid_size",
    "nearest_neighbors",
    "resample",
]


class ResampleKind(enum.Enum):
    Original = "Original"
    Under = "Under"
    Smote = "Smote"
    Hybrid = "Hybrid"

    @classmethod
    def parse(cls, value) -> "ResampleKind":
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower()
        for member in cls:
            if member.value.lower() == text:
                return member
        raise ValueError(f"unknown resampler {value!r}; expected one of {[m.value for m in cls]}")


class GapMode(enum.Enum):
    ScalarPerPoint = "ScalarPerPoint"
    PerCoordinate = "PerCoordinate"


class SmoteNeighborWarning(UserWarning):
    """Raised when k_neighbors had to be clamped to the minority size minus one."""


@dataclass(frozen=True)
class SmoteParams:
    k_neighbors: int = 5
    gap_mode: GapMode = GapMode.ScalarPerPoint

    def __post_init__(self):
        if int(self.k_neighbors) < 1:
            raise ValueError("k_neighbors must be >= 1")
        object.__setattr__(self, "gap_mode", GapMode(self.gap_mode))


def _check_classes(ds: LabeledDataset) -> tuple[int, int]:
    n0, n1 = ds.n0, ds.n1
    if n0 == 0 or n1 == 0:
        raise EmptyClass(f"both classes must be non-empty (n0={n0}, n1={n1})")
    return n0, n1


def _subsample_majority(ds: LabeledDataset, size: int, rng: np.random.Generator) -> LabeledDataset:
    # chosen majority rows keep their input order
    idx1 = np.flatnonzero(ds.labels == 1)
    chosen = rng.choice(idx1.size, size=size, replace=False)
    keep = ds.labels == 0
    keep[idx1[chosen]] = True
    return LabeledDataset(ds.features[keep], ds.labels[keep])


def undersample(ds: LabeledDataset, rng: np.random.Generator) -> LabeledDataset:
    """Keep every minority row and ``n0`` majority rows drawn without replacement."""
    n0, n1 = _check_classes(ds)
    if n1 < n0:
        raise ValueError(f"majority class (n1={n1}) smaller than minority (n0={n0})")
    return _subsample_majority(ds, n0, rng)


def oversample_random(ds: LabeledDataset, rng: np.random.Generator) -> LabeledDataset:
    """Append ``n1 - n0`` minority rows drawn with replacement."""
    n0, n1 = _check_classes(ds)
    if n1 < n0:
        raise ValueError(f"majority class (n1={n1}) smaller than minority (n0={n0})")
    minority = ds.class_rows(0)
    extra = minority[rng.integers(0, n0, size=n1 - n0)]
    return LabeledDataset(
        np.vstack([ds.features, extra]),
        np.concatenate([ds.labels, np.zeros(len(extra), np.int64)]),
    )


def nearest_neighbors(points: np.ndarray, k: int) -> np.ndarray:
    """Indices of the ``k`` nearest other rows of ``points`` (Euclidean).

    Distance ties go to the lower row index.
    """
    dist = cdist(points, points, "sqeuclidean")
    np.fill_diagonal(dist, np.inf)
    order = np.argsort(dist, axis=1, kind="stable")
    return order[:, :k]


def smote(
    ds: LabeledDataset,
    params: SmoteParams,
    target_minority: int,
    rng: np.random.Generator,
) -> LabeledDataset:
    """Grow the minority class to ``target_minority`` rows with SMOTE.

    Synthetic points are produced by visiting minority rows in a random order
    (cycling as often as needed) and interpolating each visited row towards a
    uniformly chosen member of its ``k`` nearest minority neighbours. The
    synthetic rows are appended after the original data.

    Parameters
    ----------
    ds : LabeledDataset
        Input data; the majority rows are left untouched.
    params : SmoteParams
        Neighbour count and whether the interpolation gap is drawn once per
        point (segment) or once per coordinate (box).
    target_minority : int
        Final number of class-0 rows, at least ``ds.n0``.
    rng : numpy.random.Generator

    Returns
    -------
    LabeledDataset
    """
    n0, _ = _check_classes(ds)
    if target_minority < n0:
        raise ValueError(f"target_minority={target_minority} is below n0={n0}")
    n_new = target_minority - n0
    if n_new == 0:
        return ds
    if n0 < 2:
        raise DegenerateMinority("SMOTE needs at least two minority points")
    k = int(params.k_neighbors)
    if k >= n0:
        warnings.warn(
            f"k_neighbors={k} clamped to {n0 - 1} (minority has {n0} points)",
            SmoteNeighborWarning,
            stacklevel=2,
        )
        k = n0 - 1

    minority = ds.class_rows(0)
    knn = nearest_neighbors(minority, k)
    order = rng.permutation(n0)
    base = np.resize(order, n_new)
    mate = knn[base, rng.integers(0, k, size=n_new)]
    if params.gap_mode is GapMode.ScalarPerPoint:
        gap = rng.random((n_new, 1))
    else:
        gap = rng.random((n_new, ds.d))
    synthetic = minority[base] + gap * (minority[mate] - minority[base])
    return LabeledDataset(
        np.vstack([ds.features, synthetic]),
        np.concatenate([ds.labels, np.zeros(n_new, np.int64)]),
    )


def hybrid_size(n0: int, n1: int) -> int:
    """``floor(sqrt(n0 * n1) / n0) * n0`` evaluated in exact integer arithmetic."""
    return math.isqrt(n1 // n0) * n0


def hybrid(ds: LabeledDataset, params: SmoteParams, rng: np.random.Generator) -> LabeledDataset:
    """Undersample the majority and SMOTE the minority to a common size."""
    n0, n1 = _check_classes(ds)
    if n1 < n0:
        raise ValueError(f"majority class (n1={n1}) smaller than minority (n0={n0})")
    size = hybrid_size(n0, n1)
    if size > n0 and n0 < 2:
        raise DegenerateMinority("SMOTE needs at least two minority points")
    reduced = _subsample_majority(ds, size, rng)
    return smote(reduced, params, size, rng)


def resample(kind: ResampleKind, ds: LabeledDataset, params: SmoteParams, rng: np.random.Generator) -> LabeledDataset:
    kind = ResampleKind.parse(kind)
    if kind is ResampleKind.Original:
        return ds
    if kind is ResampleKind.Under:
        return undersample(ds, rng)
    if kind is ResampleKind.Smote:
        return smote(ds, params, ds.n1, rng)
    return hybrid(ds, params, rng)
