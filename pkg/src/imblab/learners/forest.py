"""Random forest of CART trees (Gini impurity, bootstrap, random feature subsets)."""

from __future__ import annotations

import math

import numpy as np

from ..datagen import LabeledDataset
from .base import ForestParams, LearnerKind, ScoringModel, check_training_set
from ._trees import build_gini_tree, filter_order, pack_trees, predict_sum, presort


class ForestModel(ScoringModel):
    kind = LearnerKind.RandomForest

    def __init__(self, packed, n_features: int):
        super().__init__(n_features)
        self._packed = packed

    @property
    def n_trees(self) -> int:
        return self._packed[0].size

    @property
    def n_nodes(self) -> int:
        return self._packed[1].size

    def _raw_score(self, x):
        votes = predict_sum(np.ascontiguousarray(x), *self._packed)
        return votes / self.n_trees


def fit_forest(train: LabeledDataset, hp: ForestParams = ForestParams()) -> ForestModel:
    """Score = fraction of trees voting for class 1.

    Each tree sees a bootstrap sample (encoded as integer sample weights) and
    draws ``max_features`` candidate features per node, ``floor(sqrt(d))`` by
    default. Trees grow until nodes are pure or cannot be split.
    """
    x, y = check_training_set(train)
    x = np.ascontiguousarray(x)
    n, d = x.shape
    mtry = hp.max_features or max(1, math.isqrt(d))
    mtry = min(mtry, d)
    order = presort(x)
    rng = np.random.default_rng(hp.seed)
    trees = []
    for _ in range(hp.n_trees):
        weight = np.bincount(rng.integers(0, n, size=n), minlength=n).astype(float)
        tree_seed = int(rng.integers(0, 2**31 - 1))
        idx = filter_order(order, weight)
        trees.append(build_gini_tree(x, y, weight, idx, mtry, hp.min_node_size, tree_seed))
    return ForestModel(pack_trees(trees), d)
