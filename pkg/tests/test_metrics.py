from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imblab.errors import EmptyInput, InvalidLabel, LengthMismatch, MissingClass
from imblab.metrics import (
    HIGHER_IS_BETTER,
    METRIC_NAMES,
    ConfusionMatrix,
    confusion,
    cost,
    error_rates,
    f_score,
    full_report,
    pr_auc,
    roc_auc,
)
from imblab.paradigms import ThresholdRule
from oracles import pairwise_auc, sweep_pr_auc, trapezoid_auc

HAND_CM = ConfusionMatrix(tp=1, fp=1, fn=1, tn=2)
EX_SCORES = [0.1, 0.4, 0.35, 0.8]
EX_Y = [0, 0, 1, 1]


label_lists = st.lists(st.integers(0, 1), min_size=2, max_size=60)


@st.composite
def scored(draw, wide=False):
    y = draw(st.lists(st.integers(0, 1), min_size=2, max_size=200).filter(lambda v: 0 < sum(v) < len(v)))
    # integer-valued scores keep polynomial transforms exact in floating point
    elems = st.integers(0, 10_000 if wide else 8).map(float)
    s = draw(st.lists(elems, min_size=len(y), max_size=len(y)))
    return np.array(s), np.array(y)


def test_confusion_hand_example():
    cm = confusion([0, 0, 0, 1, 1], [0, 1, 0, 1, 0])
    assert (cm.tn, cm.fp, cm.fn, cm.tp) == (2, 1, 1, 1)


def test_confusion_perfect_and_inverted():
    y = np.array([0, 1, 1, 0, 1])
    cm = confusion(y, y)
    assert cm.fp == cm.fn == 0
    cm = confusion(y, 1 - y)
    assert cm.tp == cm.tn == 0


def test_confusion_errors():
    with pytest.raises(LengthMismatch):
        confusion([0, 1], [0])
    with pytest.raises(InvalidLabel):
        confusion([0, 2], [0, 1])
    with pytest.raises(EmptyInput):
        confusion([], [])
    with pytest.raises(ValueError):
        ConfusionMatrix(-1, 0, 0, 0)


def test_error_rates_hand_example():
    risk, r0, r1 = error_rates(HAND_CM)
    assert risk == pytest.approx(0.4)
    assert r0 == pytest.approx(1 / 3)
    assert r1 == pytest.approx(0.5)
    risk, r0, r1 = error_rates(HAND_CM, exact=True)
    assert risk == HAND_CM.pi0_hat * r0 + HAND_CM.pi1_hat * r1 == Fraction(2, 5)
    assert HAND_CM.pi0_hat == Fraction(3, 5)


def test_error_rates_absent_class_is_none():
    cm = ConfusionMatrix(tp=3, fp=0, fn=1, tn=0)
    risk, r0, r1 = error_rates(cm)
    assert r0 is None
    assert risk == pytest.approx(0.25)
    assert r1 == pytest.approx(0.25)
    with pytest.raises(EmptyInput):
        error_rates(ConfusionMatrix(0, 0, 0, 0))


def test_cost_examples():
    assert cost(HAND_CM, 4, 1) == pytest.approx(1.0)
    assert cost(HAND_CM, 1, 1) == error_rates(HAND_CM)[0]
    assert cost(ConfusionMatrix(tp=3, fp=0, fn=0, tn=2), 5, 2) == 0.0
    with pytest.raises(MissingClass):
        cost(ConfusionMatrix(tp=3, fp=0, fn=1, tn=0), 1, 1)


def test_f_score_examples():
    assert f_score(HAND_CM, 0) == pytest.approx(2 / 3)
    assert f_score(HAND_CM, 1) == pytest.approx(0.5)
    assert f_score(ConfusionMatrix(tp=3, fp=2, fn=1, tn=0), 0) == 0.0
    assert f_score(ConfusionMatrix(tp=0, fp=0, fn=0, tn=4), 1) == 0.0
    with pytest.raises(InvalidLabel):
        f_score(HAND_CM, 2)


def test_roc_auc_examples():
    assert roc_auc(EX_SCORES, EX_Y) == pytest.approx(0.75)
    assert roc_auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0
    assert roc_auc(np.full(6, 0.3), [0, 1, 0, 1, 1, 0]) == 0.5
    with pytest.raises(MissingClass):
        roc_auc([0.1, 0.2], [1, 1])


def test_pr_auc_examples():
    # descending: 0.8 (class 1), 0.4, 0.35 (class 1), 0.1; step area = 1 * 1/2 + 2/3 * 1/2
    assert pr_auc(EX_SCORES, EX_Y, 1) == pytest.approx(5 / 6, abs=1e-15)
    assert pr_auc(EX_SCORES, EX_Y, 1) == pytest.approx(sweep_pr_auc(EX_SCORES, EX_Y, 1), abs=1e-15)
    assert pr_auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1], 1) == 1.0
    assert pr_auc(np.full(4, 0.5), [1, 0, 1, 1], 1) == pytest.approx(0.75)
    assert pr_auc(np.full(4, 0.5), [1, 0, 1, 1], 1) == pytest.approx(sweep_pr_auc(np.full(4, 0.5), [1, 0, 1, 1]))
    with pytest.raises(MissingClass):
        pr_auc([0.1, 0.2], [1, 1], 0)


def test_full_report_perfect_scorer():
    y = np.array([0, 0, 1, 0, 1, 1, 0])
    rep = full_report(y.astype(float), ThresholdRule(0.3), y)
    assert rep.risk == 0 and rep.type1 == 0 and rep.type2 == 0
    assert rep.f0 == rep.f1 == 1.0
    assert rep.roc_auc == rep.pr_auc0 == rep.pr_auc1 == 1.0
    assert set(rep.as_dict()) == set(METRIC_NAMES)


def test_metric_orientation_table():
    assert set(HIGHER_IS_BETTER) == set(METRIC_NAMES)
    assert not HIGHER_IS_BETTER["risk"] and HIGHER_IS_BETTER["pr_auc0"]


@settings(max_examples=200, deadline=None)
@given(label_lists, st.data())
def test_risk_identity_exact(y, data):
    pred = data.draw(st.lists(st.integers(0, 1), min_size=len(y), max_size=len(y)))
    cm = confusion(y, pred)
    risk, r0, r1 = error_rates(cm, exact=True)
    if cm.n0 and cm.n1:
        assert risk == cm.pi0_hat * r0 + cm.pi1_hat * r1
        assert cost(cm, 1, 1) == float(risk)
    assert cm.pi0_hat + cm.pi1_hat == 1
    assert 0 <= f_score(cm, 0) <= 1 and 0 <= f_score(cm, 1) <= 1


@settings(max_examples=150, deadline=None)
@given(scored())
def test_roc_auc_matches_pairwise_and_trapezoid(sy):
    s, y = sy
    auc = roc_auc(s, y)
    assert auc == pytest.approx(pairwise_auc(s, y), abs=1e-12)
    assert auc == pytest.approx(trapezoid_auc(s, y), abs=1e-12)


@settings(max_examples=150, deadline=None)
@given(scored())
def test_pr_auc_matches_threshold_sweep(sy):
    s, y = sy
    for c in (0, 1):
        assert pr_auc(s, y, c) == pytest.approx(sweep_pr_auc(s, y, c), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(scored(wide=True))
def test_roc_auc_reflection_and_transform_invariance(sy):
    s, y = sy
    if len(set(s.tolist())) == s.size:
        assert roc_auc(s, y) + roc_auc(-s, y) == pytest.approx(1.0, abs=1e-12)
    assert roc_auc(s**3 + 7 * s - 5, y) == roc_auc(s, y)


@settings(max_examples=100, deadline=None)
@given(scored())
def test_pr_auc_class_swap_symmetry(sy):
    s, y = sy
    assert pr_auc(s, y, 0) == pytest.approx(pr_auc(-s, 1 - y, 1), abs=1e-15)
    rep = full_report(s / 8, ThresholdRule(0.5), y)
    swapped = full_report(1 - s / 8, ThresholdRule(0.5), 1 - y)
    assert rep.pr_auc0 == pytest.approx(swapped.pr_auc1, abs=1e-12)
    assert rep.pr_auc1 == pytest.approx(swapped.pr_auc0, abs=1e-12)
