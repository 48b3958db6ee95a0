import math

import numpy as np
import pytest

from imblab import learners
from imblab.datagen import ExampleId, LabeledDataset, make_dataset
from imblab.errors import DimensionMismatch, EmptyClass
from imblab.learners import LearnerKind
from imblab.learners.logistic import _design, negative_log_likelihood
from oracles import linearly_separable, max_gradient_error, separable_set, training_accuracy, xor_set

ALL_KINDS = list(LearnerKind)
# small, fast settings for the slower learners in unit tests
FAST_HP = {
    LearnerKind.RandomForest: learners.ForestParams(n_trees=50, seed=3),
    LearnerKind.GradientBoostedTrees: learners.BoostingParams(seed=3),
    LearnerKind.LogisticRegression: learners.LogisticParams(),
    LearnerKind.NeuralNet: learners.NeuralNetParams(seed=3),
    LearnerKind.Svm: learners.SvmParams(seed=3),
}


def test_lp_oracle_agrees_with_construction():
    ds = separable_set()
    assert linearly_separable(ds.features, ds.labels)
    xor = xor_set()
    assert not linearly_separable(xor.features, xor.labels)


def test_logistic_separable_set_fits_perfectly():
    ds = separable_set()
    model = learners.fit(LearnerKind.LogisticRegression, ds)
    assert training_accuracy(model, ds) == 1.0


def test_logistic_loss_is_non_increasing():
    ds = make_dataset(ExampleId.Example1, 4, 60, np.random.default_rng(1))
    model = learners.fit("LR", ds)
    hist = np.array(model.loss_history)
    assert len(hist) >= 2
    assert np.all(np.diff(hist) <= 1e-12 * np.abs(hist[:-1]))
    assert hist[-1] == pytest.approx(negative_log_likelihood(model.coef, _design(ds.features), ds.labels.astype(float)))


def test_logistic_loss_non_increasing_on_separable_data():
    hist = np.array(learners.fit("LR", separable_set()).loss_history)
    assert np.all(np.diff(hist) <= 0)


def test_logistic_constant_features_give_class_proportion():
    y = np.r_[np.zeros(13, int), np.ones(37, int)]
    ds = LabeledDataset(np.full((50, 3), 2.5), y)
    model = learners.fit("LR", ds)
    scores = model.score(np.full((7, 3), 2.5))
    np.testing.assert_allclose(scores, 37 / 50, atol=1e-6)


def test_xor_separation_gap():
    ds = xor_set()
    lr = learners.fit(LearnerKind.LogisticRegression, ds)
    assert training_accuracy(lr, ds) <= 0.6
    for kind in (LearnerKind.NeuralNet, LearnerKind.RandomForest, LearnerKind.GradientBoostedTrees):
        model = learners.fit(kind, ds, FAST_HP[kind])
        assert training_accuracy(model, ds) >= 0.95, kind


def test_xor_no_linear_rule_beats_half():
    # the fitted linear rule evaluated at all four cluster centres
    ds = xor_set()
    lr = learners.fit(LearnerKind.LogisticRegression, ds)
    quadrant_pred = lr.score(np.array([[1.0, 1], [-1, -1], [1, -1], [-1, 1]])) > 0.5
    # a linear rule cannot put both class-0 corners on one side and both class-1 corners on the other
    assert not (not quadrant_pred[0] and not quadrant_pred[1] and quadrant_pred[2] and quadrant_pred[3])


def test_neural_net_gradient_matches_finite_differences():
    # random inputs keep every hidden pre-activation away from the ReLU kink
    assert max_gradient_error(np.random.default_rng(7)) <= 1e-4


@pytest.mark.parametrize("kind", [LearnerKind.RandomForest, LearnerKind.GradientBoostedTrees])
def test_trees_invariant_to_monotone_feature_transform(kind):
    ds = make_dataset(ExampleId.Example2, 2, 40, np.random.default_rng(2))
    test = make_dataset(ExampleId.Example2, 2, 30, np.random.default_rng(3)).features
    transformed = ds.features.copy()
    transformed[:, 1] = np.exp(transformed[:, 1]) * 3 + 1
    test_t = test.copy()
    test_t[:, 1] = np.exp(test_t[:, 1]) * 3 + 1
    a = learners.fit(kind, ds, FAST_HP[kind]).score(test)
    b = learners.fit(kind, LabeledDataset(transformed, ds.labels), FAST_HP[kind]).score(test_t)
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_single_class_training_set_rejected(kind):
    ds = LabeledDataset(np.random.default_rng(0).normal(size=(10, 5)), np.ones(10, int))
    with pytest.raises(EmptyClass):
        learners.fit(kind, ds, FAST_HP[kind])


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_score_contract(kind):
    ds = make_dataset(ExampleId.Example1, 1, 100, np.random.default_rng(4))
    model = learners.fit(kind, ds, FAST_HP[kind])
    assert model.score(np.empty((0, 5))).shape == (0,)
    with pytest.raises(DimensionMismatch):
        model.score(np.zeros((3, 4)))
    fresh = make_dataset(ExampleId.Example1, 1, 100, np.random.default_rng(5))
    s = model.score(fresh.features)
    assert s.shape == (200,)
    assert np.all(np.isfinite(s)) and np.all((s >= 0) & (s <= 1))
    s1, s0 = s[fresh.labels == 1], s[fresh.labels == 0]
    se = math.sqrt(s1.var(ddof=1) / s1.size + s0.var(ddof=1) / s0.size)
    assert s1.mean() - s0.mean() > 3 * se


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_scores_rarely_need_clamping(kind):
    ds = make_dataset(ExampleId.Example1, 1, 150, np.random.default_rng(6))
    model = learners.fit(kind, ds, FAST_HP[kind])
    test = make_dataset(ExampleId.Example1, 1, 1000, np.random.default_rng(7)).features
    raw = model.raw_score(test)
    assert np.all(np.isfinite(raw))
    outside = (raw < -1e-9) | (raw > 1 + 1e-9)
    assert outside.mean() < 0.001


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_fit_is_deterministic(kind):
    ds = make_dataset(ExampleId.Example2, 2, 60, np.random.default_rng(8))
    test = make_dataset(ExampleId.Example2, 2, 20, np.random.default_rng(9)).features
    a = learners.fit(kind, ds, FAST_HP[kind]).score(test)
    b = learners.fit(kind, ds, FAST_HP[kind]).score(test)
    np.testing.assert_array_equal(a, b)


def test_forest_score_is_vote_fraction():
    ds = make_dataset(ExampleId.Example1, 2, 40, np.random.default_rng(10))
    model = learners.fit("RF", ds, learners.ForestParams(n_trees=8, seed=1))
    s = model.score(ds.features)
    np.testing.assert_allclose(s * 8, np.round(s * 8), atol=1e-12)


def test_svm_matches_reference_solver():
    svm_mod = pytest.importorskip("sklearn.svm")
    ds = make_dataset(ExampleId.Example1, 4, 100, np.random.default_rng(11))
    model = learners.fit("SVM", ds)
    ref = svm_mod.SVC(C=1.0, gamma=1 / 5, kernel="rbf", tol=1e-3).fit(ds.features, ds.labels)
    test = make_dataset(ExampleId.Example1, 4, 50, np.random.default_rng(12)).features
    ours = model.decision_function(test)
    theirs = ref.decision_function(test)
    # both stop at a 1e-3 KKT tolerance, so decision values agree to that order
    assert np.max(np.abs(ours - theirs)) <= 0.02
    assert abs(len(model.support_vectors) - ref.support_.size) <= 0.02 * ref.support_.size + 1


def test_learner_kind_parse():
    assert LearnerKind.parse("xgb") is LearnerKind.GradientBoostedTrees
    assert LearnerKind.parse("Svm") is LearnerKind.Svm
    with pytest.raises(ValueError):
        LearnerKind.parse("knn")


def test_hyperparameter_validation():
    with pytest.raises(ValueError):
        learners.NeuralNetParams(hidden=0)
    with pytest.raises(ValueError):
        learners.default_params("RF", depth=3)
    with pytest.raises(TypeError):
        learners.fit("LR", separable_set(), learners.ForestParams())
