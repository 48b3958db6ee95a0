import math

import numpy as np
import pytest
from scipy import stats

from imblab.datagen import MU0, MU1, SIGMA, ExampleId, make_dataset
from imblab.errors import SampleTooSmall, WrongParadigm
from imblab.paradigms import (
    ParadigmKind,
    ParadigmSpec,
    Provenance,
    ThresholdRule,
    binomial_upper_tails,
    classify,
    fixed_threshold,
    np_calibrate,
    np_order_statistic_rank,
    np_split,
    np_threshold,
)
from oracles import binomial_tail, exact_ranks


class _ProjectionModel:
    """Scores ``w . x`` with ``w = Sigma^-1 (mu1 - mu0)``; class-0 scores are exactly normal."""

    w = np.linalg.solve(SIGMA, MU1 - MU0)

    def score(self, x):
        return np.asarray(x) @ self.w


def test_fixed_thresholds():
    assert fixed_threshold(ParadigmSpec.cc()).cutoff == 0.5
    assert fixed_threshold(ParadigmSpec.cs(4, 1)).cutoff == pytest.approx(0.8)
    assert fixed_threshold(ParadigmSpec.cs(3, 3)).cutoff == 0.5
    assert fixed_threshold(ParadigmSpec.cc()).provenance is Provenance.Fixed


def test_fixed_threshold_rejects_np_and_costless_cs():
    with pytest.raises(WrongParadigm):
        fixed_threshold(ParadigmSpec.np())
    with pytest.raises(ValueError):
        fixed_threshold(ParadigmSpec.cs())
    assert fixed_threshold(ParadigmSpec.cs().with_costs(8, 1)).cutoff == pytest.approx(8 / 9)


def test_spec_validation():
    with pytest.raises(ValueError):
        ParadigmSpec.cs(0, 1)
    with pytest.raises(ValueError):
        ParadigmSpec.cs(2, None)
    with pytest.raises(ValueError):
        ParadigmSpec.np(alpha=1.0)
    with pytest.raises(ValueError):
        ParadigmSpec.np(delta=0.0)
    assert ParadigmKind.parse("np") is ParadigmKind.NP
    with pytest.raises(ValueError):
        ParadigmKind.parse("XX")


def test_rank_examples():
    assert np_order_statistic_rank(14) == 14
    assert np_order_statistic_rank(100) == 96
    assert 0.95**14 == pytest.approx(0.4877, abs=1e-4)
    assert binomial_tail(14, 13, 0.05) == pytest.approx(0.847, abs=1e-3)


def test_rank_too_small_sample():
    with pytest.raises(SampleTooSmall):
        np_order_statistic_rank(13)
    with pytest.raises(SampleTooSmall):
        np_order_statistic_rank(0)


@pytest.mark.parametrize("alpha,delta", [(0.05, 0.5), (0.05, 0.05), (0.1, 0.2), (0.2, 0.9), (0.01, 0.3)])
def test_rank_matches_brute_force(alpha, delta):
    for n, expected in enumerate(exact_ranks(300, alpha, delta), start=1):
        if expected is None:
            with pytest.raises(SampleTooSmall):
                np_order_statistic_rank(n, alpha, delta)
        else:
            assert np_order_statistic_rank(n, alpha, delta) == expected


def test_binomial_tails_match_scipy():
    for n, p in [(1, 0.3), (50, 0.95), (1000, 0.99)]:
        k = np.arange(n + 1)
        np.testing.assert_allclose(np.exp(binomial_upper_tails(n, p)), stats.binom.sf(k - 1, n, p), rtol=1e-9, atol=1e-300)


def test_rank_monotone_in_alpha_and_delta():
    n = 200
    deltas = [0.05, 0.1, 0.3, 0.5, 0.8]
    alphas = [0.02, 0.05, 0.1, 0.2]
    for a in alphas:
        ks = [np_order_statistic_rank(n, a, d) for d in deltas]
        assert all(x >= y for x, y in zip(ks, ks[1:]))
    for d in deltas:
        ks = [np_order_statistic_rank(n, a, d) for a in alphas]
        assert all(x >= y for x, y in zip(ks, ks[1:]))


def test_np_threshold_constant_scores():
    rule = np_threshold(np.full(40, 0.37))
    assert rule.cutoff == 0.37
    assert rule.provenance is Provenance.NpOrderStatistic
    assert rule.np_n == 40


def test_np_threshold_m14_takes_maximum():
    s = np.random.default_rng(0).random(14)
    rule = np_threshold(s)
    assert rule.cutoff == s.max()
    assert (rule.np_k, rule.np_n) == (14, 14)


def test_np_cutoff_is_a_heldout_score():
    rng = np.random.default_rng(1)
    for m in (20, 57, 300):
        s = rng.normal(size=m)
        rule = np_threshold(s)
        assert rule.cutoff in set(s.tolist())
        assert rule.cutoff == np.sort(s)[rule.np_k - 1]


def test_np_calibrate_uses_model_scores():
    x = make_dataset(ExampleId.Example1, 1, 100, np.random.default_rng(2)).class_rows(0)
    rule = np_calibrate(_ProjectionModel(), x)
    assert rule.cutoff == np.sort(_ProjectionModel().score(x))[95]


def test_np_type_one_guarantee_monte_carlo():
    # population type I error of the projection score is Phi-tail of a normal
    model = _ProjectionModel()
    mean0 = float(model.w @ MU0)
    sd0 = math.sqrt(float(model.w @ SIGMA @ model.w))
    rng = np.random.default_rng(2024)
    violations = 0
    trials = 200
    for _ in range(trials):
        held = make_dataset(ExampleId.Example1, 1, 150, rng).class_rows(0)
        rule = np_calibrate(model, held, 0.05, 0.5)
        r0 = stats.norm.sf((rule.cutoff - mean0) / sd0)
        violations += r0 > 0.05
    assert violations / trials <= 0.5 + 0.07


def test_classify_examples():
    np.testing.assert_array_equal(classify([0.2, 0.7], ThresholdRule(0.5)), [0, 1])
    np.testing.assert_array_equal(classify([0.5], 0.5), [0])
    np.testing.assert_array_equal(classify([0.1, 0.4, 0.6], 0.6), [0, 0, 0])
    assert classify([0.9], 0.5).dtype == np.int8


def test_classify_monotone_in_each_score():
    rng = np.random.default_rng(3)
    s = rng.random(200)
    base = classify(s, 0.4)
    for i in range(0, 200, 7):
        raised = s.copy()
        raised[i] += rng.random()
        assert classify(raised, 0.4)[i] >= base[i]


def test_classify_invariant_under_increasing_transform():
    rng = np.random.default_rng(4)
    s = rng.random(500)
    cutoff = float(s[17])
    f = lambda v: np.log(np.asarray(v) + 1.0) ** 3
    np.testing.assert_array_equal(classify(s, cutoff), classify(f(s), float(f(cutoff))))


def test_np_split_partitions_class0():
    ds = make_dataset(ExampleId.Example1, 4, 101, np.random.default_rng(5))
    fit_set, held = np_split(ds, np.random.default_rng(6))
    assert fit_set.n0 + held.shape[0] == ds.n0
    assert fit_set.n0 == 50 or fit_set.n0 == 51
    assert fit_set.n1 == ds.n1
    rows = {tuple(r) for r in ds.class_rows(0)}
    fit_rows = {tuple(r) for r in fit_set.class_rows(0)}
    held_rows = {tuple(r) for r in held}
    assert fit_rows | held_rows == rows
    assert not fit_rows & held_rows


def test_np_split_is_deterministic_and_validated():
    ds = make_dataset(ExampleId.Example2, 2, 30, np.random.default_rng(7))
    a = np_split(ds, np.random.default_rng(8))
    b = np_split(ds, np.random.default_rng(8))
    np.testing.assert_array_equal(a[1], b[1])
    with pytest.raises(ValueError):
        np_split(ds, np.random.default_rng(0), 1.0)
