"""Synthetic Gaussian / Gaussian-mixture benchmark distributions.

Class 0 is always the minority class. Two presets are provided:

* ``Example1``: two 5-d Gaussians with a shared covariance (linear Bayes rule).
* ``Example2``: a single Gaussian centred between the Example 1 means
  (class 0) against an equal-weight mixture of the two Example 1 Gaussians
  (class 1), giving a non-linear Bayes rule.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit, logsumexp
from scipy.stats import norm

from .errors import InvalidRatio, NotPositiveDefinite

__all__ = [
    "ExampleId",
    "GaussianSpec",
    "MixtureSpec",
    "LabeledDataset",
    "cholesky",
    "mvn_sample",
    "mixture_sample",
    "class_distributions",
    "make_dataset",
    "bayes_eta",
    "bayes_risk_example1",
    "mahalanobis_sq_example1",
    "write_dataset",
    "read_dataset",
    "MU0",
    "MU1",
    "SIGMA",
]

MU0 = np.zeros(5)
MU1 = np.array([2.0, 2.0, 2.0, 0.0, 0.0])
SIGMA = np.array(
    [
        [1.0, 0.5, 0.25, 0.0, 0.0],
        [0.5, 1.0, 0.5, 0.0, 0.0],
        [0.25, 0.5, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 1.0],
    ]
)


class ExampleId(enum.Enum):
    Example1 = 1
    Example2 = 2

    @classmethod
    def parse(cls, value) -> "ExampleId":
        if isinstance(value, cls):
            return value
        if isinstance(value, (int, np.integer)) or (isinstance(value, str) and value.strip().isdigit()):
            return cls(int(value))
        text = str(value).strip().lower().replace(" ", "")
        for member in cls:
            if member.name.lower() == text:
                return member
        raise ValueError(f"unknown example {value!r}; expected 1, 2, Example1 or Example2")


def cholesky(covariance) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == covariance``.

    Raises
    ------
    NotPositiveDefinite
        If the matrix is not symmetric positive definite.
    """
    a = np.asarray(covariance, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"covariance must be square, got shape {a.shape}")
    if not np.array_equal(a, a.T):
        raise ValueError("covariance must be exactly symmetric")
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None


def _is_point_mass(covariance: np.ndarray) -> bool:
    return not np.any(covariance)


@dataclass(frozen=True)
class GaussianSpec:
    """``N(mean, covariance)``.

    An all-zero covariance is accepted as a point mass at ``mean``; anything
    else must be symmetric positive definite.
    """

    mean: np.ndarray
    covariance: np.ndarray
    _factor: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.asarray(self.covariance, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"covariance shape {cov.shape} does not match mean length {mean.size}")
        factor = np.zeros_like(cov) if _is_point_mass(cov) else cholesky(cov)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "_factor", factor)

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def factor(self) -> np.ndarray:
        return self._factor

    def logpdf(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        diff = x - self.mean
        z = np.linalg.solve(self._factor, diff.T)
        logdet = 2.0 * np.log(np.diag(self._factor)).sum()
        return -0.5 * (np.sum(z * z, axis=0) + logdet + self.dim * math.log(2 * math.pi))


@dataclass(frozen=True)
class MixtureSpec:
    components: tuple
    weights: np.ndarray

    def __post_init__(self):
        comps = tuple(self.components)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if not comps:
            raise ValueError("a mixture needs at least one component")
        if w.size != len(comps):
            raise ValueError("one weight per component required")
        if np.any(w < 0) or np.any(w > 1) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"mixture weights must lie in [0, 1] and sum to 1, got {w}")
        if len({c.dim for c in comps}) != 1:
            raise ValueError("mixture components must share one dimension")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    def logpdf(self, x) -> np.ndarray:
        with np.errstate(divide="ignore"):
            logw = np.log(self.weights)
        parts = np.stack([c.logpdf(x) for c in self.components]) + logw[:, None]
        return logsumexp(parts, axis=0)


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix with binary labels (class 0 = minority)."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels)
        if x.ndim != 2:
            raise ValueError(f"features must be 2-d, got shape {x.shape}")
        y = y.reshape(-1)
        if x.shape[0] != y.size:
            raise ValueError(f"{x.shape[0]} feature rows but {y.size} labels")
        if y.size and not np.all((y == 0) | (y == 1)):
            raise ValueError("labels must be 0 or 1")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y.astype(np.int64))

    @property
    def n(self) -> int:
        return self.labels.size

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def n0(self) -> int:
        return int(np.count_nonzero(self.labels == 0))

    @property
    def n1(self) -> int:
        return int(np.count_nonzero(self.labels == 1))

    @property
    def ir(self) -> float:
        return self.n1 / self.n0 if self.n0 else math.inf

    def class_rows(self, label: int) -> np.ndarray:
        return self.features[self.labels == label]

    @classmethod
    def from_classes(cls, class0, class1) -> "LabeledDataset":
        class0 = np.asarray(class0, dtype=float)
        class1 = np.asarray(class1, dtype=float)
        labels = np.concatenate([np.zeros(len(class0), np.int64), np.ones(len(class1), np.int64)])
        return cls(np.vstack([class0, class1]), labels)


def mvn_sample(spec: GaussianSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` rows ``mean + L z`` with ``z`` standard normal."""
    if count < 1:
        raise ValueError("count must be >= 1")
    z = rng.standard_normal((count, spec.dim))
    return spec.mean + z @ spec.factor.T


def mixture_sample(spec: MixtureSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    # normals are drawn before the component labels so that a one-component
    # mixture reproduces mvn_sample exactly for the same generator state
    if count < 1:
        raise ValueError("count must be >= 1")
    z = rng.standard_normal((count, spec.dim))
    which = rng.choice(len(spec.components), size=count, p=spec.weights)
    out = np.empty_like(z)
    for k, comp in enumerate(spec.components):
        rows = which == k
        out[rows] = comp.mean + z[rows] @ comp.factor.T
    return out


_E1_CLASS0 = GaussianSpec(MU0, SIGMA)
_E1_CLASS1 = GaussianSpec(MU1, SIGMA)
_E2_CLASS0 = GaussianSpec((MU0 + MU1) / 2, SIGMA)
_E2_CLASS1 = MixtureSpec((_E1_CLASS0, _E1_CLASS1), np.array([0.5, 0.5]))


def class_distributions(example: ExampleId):
    """Return the ``(class 0, class 1)`` conditional distributions of a preset."""
    example = ExampleId.parse(example)
    if example is ExampleId.Example1:
        return _E1_CLASS0, _E1_CLASS1
    return _E2_CLASS0, _E2_CLASS1


def _sample(dist, count, rng):
    if isinstance(dist, MixtureSpec):
        return mixture_sample(dist, count, rng)
    return mvn_sample(dist, count, rng)


def make_dataset(example, ir: float, minority_count: int, rng: np.random.Generator) -> LabeledDataset:
    """Draw ``minority_count`` class-0 rows and ``round(minority_count * ir)`` class-1 rows.

    Rows are ordered class 0 first, then class 1.
    """
    if not ir >= 1:
        raise InvalidRatio(f"imbalance ratio must be >= 1, got {ir}")
    if minority_count < 1:
        raise ValueError("minority_count must be >= 1")
    dist0, dist1 = class_distributions(example)
    n1 = int(round(minority_count * ir))
    x0 = _sample(dist0, minority_count, rng)
    x1 = _sample(dist1, n1, rng)
    return LabeledDataset.from_classes(x0, x1)


def bayes_eta(example, x, ir: float):
    """Posterior ``P(Y=1 | X=x)`` when ``P(Y=1)/P(Y=0) = ir``.

    Accepts one point (returns a float) or a matrix of points (returns an array).
    """
    arr = np.asarray(x, dtype=float)
    dist0, dist1 = class_distributions(example)
    if arr.shape[-1] != dist0.dim:
        raise ValueError(f"points must have dimension {dist0.dim}")
    log_odds = dist1.logpdf(arr) - dist0.logpdf(arr) + math.log(ir)
    eta = expit(log_odds)
    return float(eta[0]) if arr.ndim == 1 else eta


def mahalanobis_sq_example1() -> float:
    diff = MU1 - MU0
    return float(diff @ np.linalg.solve(SIGMA, diff))


def bayes_risk_example1(ir: float) -> float:
    """Risk of the CC oracle ``1{eta > 1/2}`` on Example 1 with ``pi1/pi0 = ir``.

    The log-likelihood ratio is ``N(-D/2, D)`` under class 0 and ``N(D/2, D)``
    under class 1, with ``D`` the squared Mahalanobis distance between means;
    the oracle predicts 1 when it exceeds ``-log(ir)``.
    """
    if not ir >= 1:
        raise InvalidRatio(f"imbalance ratio must be >= 1, got {ir}")
    d2 = mahalanobis_sq_example1()
    delta = math.sqrt(d2)
    cut = -math.log(ir)
    type1 = norm.sf((cut + d2 / 2) / delta)
    type2 = norm.cdf((cut - d2 / 2) / delta)
    pi0 = 1.0 / (1.0 + ir)
    return float(pi0 * type1 + (1.0 - pi0) * type2)


def write_dataset(ds: LabeledDataset, path) -> None:
    """Write ``x1,...,xd,y`` CSV; floats use ``repr`` so reading back is lossless."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{j + 1}" for j in range(ds.d)] + ["y"])
        for row, label in zip(ds.features, ds.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def read_dataset(path) -> LabeledDataset:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[-1] != "y":
            raise ValueError(f"{path}: expected header x1,...,xd,y")
        rows = [r for r in reader if r]
    d = len(header) - 1
    if not rows:
        return LabeledDataset(np.empty((0, d)), np.empty(0, np.int64))
    feats = np.array([[float(v) for v in r[:-1]] for r in rows])
    labels = np.array([int(r[-1]) for r in rows])
    return LabeledDataset(feats, labels)
