"""Shared fit/score contract for the scoring classifiers."""

from __future__ import annotations

import enum
from dataclasses import dataclass, fields

import numpy as np

from ..datagen import LabeledDataset
from ..errors import DimensionMismatch, EmptyClass


class LearnerKind(enum.Enum):
    LogisticRegression = "LogisticRegression"
    NeuralNet = "NeuralNet"
    RandomForest = "RandomForest"
    Svm = "Svm"
    GradientBoostedTrees = "GradientBoostedTrees"

    @classmethod
    def parse(cls, value) -> "LearnerKind":
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower()
        for member in cls:
            if text in (member.value.lower(), _SHORT[member].lower()):
                return member
        raise ValueError(f"unknown learner {value!r}; expected one of {[m.value for m in cls]}")

    @property
    def short(self) -> str:
        return _SHORT[self]


_SHORT = {
    LearnerKind.LogisticRegression: "LR",
    LearnerKind.NeuralNet: "NN",
    LearnerKind.RandomForest: "RF",
    LearnerKind.Svm: "SVM",
    LearnerKind.GradientBoostedTrees: "XGB",
}


class _Params:
    """Validation shared by the hyperparameter dataclasses."""

    _positive: tuple = ()

    def __post_init__(self):
        for name in self._positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"{type(self).__name__}.{name} must be > 0, got {getattr(self, name)}")

    @classmethod
    def from_dict(cls, values: dict):
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ValueError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
        return cls(**values)


@dataclass(frozen=True)
class LogisticParams(_Params):
    max_iter: int = 50
    tol: float = 1e-8
    ridge: float = 1e-8
    seed: int = 0
    _positive = ("max_iter", "tol", "ridge")


@dataclass(frozen=True)
class NeuralNetParams(_Params):
    hidden: int = 5
    learning_rate: float = 0.01
    epochs: int = 500
    init_scale: float = 0.5
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    _positive = ("hidden", "learning_rate", "epochs", "init_scale", "eps")


@dataclass(frozen=True)
class ForestParams(_Params):
    n_trees: int = 200
    max_features: int | None = None  # None -> floor(sqrt(d))
    min_node_size: int = 1
    seed: int = 0
    _positive = ("n_trees", "min_node_size")


@dataclass(frozen=True)
class SvmParams(_Params):
    C: float = 1.0
    gamma: float | None = None  # None -> 1/d
    tol: float = 1e-3
    max_passes: int = 10_000
    cache_mb: float = 200.0
    shrinking: bool = True
    seed: int = 0
    _positive = ("C", "tol", "max_passes", "cache_mb")


@dataclass(frozen=True)
class BoostingParams(_Params):
    n_rounds: int = 50
    learning_rate: float = 0.3
    max_depth: int = 6
    reg_lambda: float = 1.0
    min_child_weight: float = 1.0
    gamma: float = 0.0
    seed: int = 0
    _positive = ("n_rounds", "learning_rate", "max_depth")


DEFAULT_PARAMS = {
    LearnerKind.LogisticRegression: LogisticParams,
    LearnerKind.NeuralNet: NeuralNetParams,
    LearnerKind.RandomForest: ForestParams,
    LearnerKind.Svm: SvmParams,
    LearnerKind.GradientBoostedTrees: BoostingParams,
}


class ScoringModel:
    """A fitted classifier whose ``score`` estimates ``P(Y=1 | x)``.

    Subclasses implement ``_raw_score``; ``score`` validates the input and
    clips the output into ``[0, 1]``.
    """

    kind: LearnerKind

    def __init__(self, n_features: int):
        self.n_features = int(n_features)

    def score(self, features) -> np.ndarray:
        x = np.asarray(features, dtype=float)
        if x.ndim == 1 and x.size == 0:
            return np.empty(0)
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected (m, {self.n_features}) features, got shape {x.shape}")
        if x.shape[0] == 0:
            return np.empty(0)
        return np.clip(self._raw_score(x), 0.0, 1.0)

    def raw_score(self, features) -> np.ndarray:
        """Scores before the safety clip into [0, 1]."""
        x = np.asarray(features, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected (m, {self.n_features}) features, got shape {x.shape}")
        return self._raw_score(x)

    def _raw_score(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def check_training_set(train: LabeledDataset) -> tuple[np.ndarray, np.ndarray]:
    if train.n0 == 0 or train.n1 == 0:
        raise EmptyClass(f"training data needs both classes (n0={train.n0}, n1={train.n1})")
    if train.d < 1:
        raise DimensionMismatch("training data has no feature columns")
    x = train.features
    if not np.all(np.isfinite(x)):
        raise ValueError("training features contain NaN or Inf")
    return x, train.labels.astype(float)
