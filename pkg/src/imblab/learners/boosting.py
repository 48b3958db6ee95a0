"""Gradient-boosted trees with logistic loss and second-order (Newton) leaf weights."""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from ..datagen import LabeledDataset
from ..errors import NonFiniteLoss
from .base import BoostingParams, LearnerKind, ScoringModel, check_training_set
from ._trees import build_boost_tree, pack_trees, predict_sum, presort


class BoostingModel(ScoringModel):
    kind = LearnerKind.GradientBoostedTrees

    def __init__(self, packed, n_features: int, base_margin: float):
        super().__init__(n_features)
        self._packed = packed
        self.base_margin = base_margin

    @property
    def n_trees(self) -> int:
        return self._packed[0].size

    def margin(self, x: np.ndarray) -> np.ndarray:
        return self.base_margin + predict_sum(np.ascontiguousarray(x), *self._packed)

    def _raw_score(self, x):
        return expit(self.margin(x))


def fit_boosting(train: LabeledDataset, hp: BoostingParams = BoostingParams()) -> BoostingModel:
    # base score 0.5, i.e. every margin starts at 0
    x, y = check_training_set(train)
    x = np.ascontiguousarray(x)
    order = presort(x)
    margin = np.zeros(x.shape[0])
    trees = []
    for r in range(hp.n_rounds):
        p = expit(margin)
        grad = p - y
        hess = p * (1.0 - p)
        trees.append(
            build_boost_tree(
                x, grad, hess, order.copy(), hp.max_depth, hp.reg_lambda,
                hp.min_child_weight, hp.gamma, hp.learning_rate, margin,
            )
        )
        if not np.all(np.isfinite(margin)):
            raise NonFiniteLoss(f"boosting margins became non-finite in round {r}")
    return BoostingModel(pack_trees(trees), x.shape[1], 0.0)
