"""Scoring classifiers sharing one ``fit`` / ``score`` contract."""

from __future__ import annotations

from ..datagen import LabeledDataset
from .base import (
    DEFAULT_PARAMS,
    BoostingParams,
    ForestParams,
    LearnerKind,
    LogisticParams,
    NeuralNetParams,
    ScoringModel,
    SvmParams,
)
from .boosting import BoostingModel, fit_boosting
from .forest import ForestModel, fit_forest
from .logistic import LogisticModel, fit_logistic
from .neural import NeuralNetModel, fit_neural_net
from .svm import SvmModel, fit_svm

_FITTERS = {
    LearnerKind.LogisticRegression: fit_logistic,
    LearnerKind.NeuralNet: fit_neural_net,
    LearnerKind.RandomForest: fit_forest,
    LearnerKind.Svm: fit_svm,
    LearnerKind.GradientBoostedTrees: fit_boosting,
}


def default_params(kind, **overrides):
    """Default hyperparameters for ``kind`` with optional field overrides."""
    return DEFAULT_PARAMS[LearnerKind.parse(kind)].from_dict(overrides)


def fit(kind, train: LabeledDataset, hp=None) -> ScoringModel:
    kind = LearnerKind.parse(kind)
    if hp is None:
        hp = DEFAULT_PARAMS[kind]()
    elif not isinstance(hp, DEFAULT_PARAMS[kind]):
        raise TypeError(f"{kind.value} expects {DEFAULT_PARAMS[kind].__name__}, got {type(hp).__name__}")
    return _FITTERS[kind](train, hp)


def score(model: ScoringModel, features):
    return model.score(features)


__all__ = [
    "LearnerKind",
    "ScoringModel",
    "LogisticParams",
    "NeuralNetParams",
    "ForestParams",
    "SvmParams",
    "BoostingParams",
    "LogisticModel",
    "NeuralNetModel",
    "ForestModel",
    "SvmModel",
    "BoostingModel",
    "DEFAULT_PARAMS",
    "default_params",
    "fit",
    "score",
]
