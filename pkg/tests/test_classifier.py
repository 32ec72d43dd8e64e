import json
import statistics

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from factgate.classifier import (
    NbModel,
    classify_fact,
    judge_summary,
    load_model,
    model_from_dict,
    posterior_factual,
    posterior_not_factual,
    save_model,
    train,
    train_bernoulli,
)
from factgate.core import FactLabel, FeatureVector
from factgate.errors import DegenerateVariance, EmptyTraining, NoFacts, SingleClassTraining

from . import oracles


def model_1d(priors=(0.5, 0.5), means=(0.0, 0.0), variances=(1.0, 1.0)):
    return NbModel(priors, np.array(means).reshape(2, 1), np.array(variances).reshape(2, 1),
                   0.0, ("f0",))


def test_priors_from_frequencies():
    m = train([[0.1], [0.2], [0.3], [0.9]], [1, 1, 1, 0])
    assert m.priors == (0.75, 0.25)


def test_constant_feature_variance_is_epsilon():
    m = train([[0.5, 0.1], [0.5, 0.2], [0.3, 0.9]], [1, 1, 0], var_smoothing=1e-6)
    assert m.variances[0, 0] == 1e-6
    assert m.variances[1, 0] == 1e-6  # single example class


def test_four_point_oracle():
    X = [0.1, 0.3, 0.6, 1.0]
    y = [1, 1, 0, 0]
    m = train([[v] for v in X], y)
    eps = 1e-9 * statistics.pvariance(X)
    assert m.var_smoothing == pytest.approx(eps, rel=1e-12)
    assert m.means[0, 0] == pytest.approx(statistics.fmean([0.1, 0.3]), abs=1e-15)
    assert m.means[1, 0] == pytest.approx(statistics.fmean([0.6, 1.0]), abs=1e-15)
    assert m.variances[0, 0] == pytest.approx(statistics.pvariance([0.1, 0.3]) + eps, rel=1e-12)
    assert m.variances[1, 0] == pytest.approx(statistics.pvariance([0.6, 1.0]) + eps, rel=1e-12)
    # hand values: var 0.01 and 0.04
    assert m.variances[0, 0] == pytest.approx(0.01, rel=1e-6)
    assert m.variances[1, 0] == pytest.approx(0.04, rel=1e-6)


def test_training_errors():
    with pytest.raises(EmptyTraining):
        train([], [])
    with pytest.raises(SingleClassTraining):
        train([[0.1], [0.2]], [1, 1])
    with pytest.raises(SingleClassTraining):
        train_bernoulli([[0.1]], [0])
    with pytest.raises(DegenerateVariance):
        train([[0.1], [0.1], [0.5], [0.5]], [1, 1, 0, 0], var_smoothing=0.0)


def test_symmetric_model_gives_half():
    m = model_1d()
    for x in (-3.0, 0.0, 0.7):
        assert posterior_factual(m, [x]) == 0.5
        assert classify_fact(m, [x]) is FactLabel.NOT_FACTUAL


def test_factual_mean_dominates():
    m = model_1d(means=(0.9, 0.1), variances=(0.01, 0.01))
    assert posterior_factual(m, [0.9]) > 0.5
    assert classify_fact(m, [0.9]) is FactLabel.FACTUAL


def test_posterior_point_nine_is_factual():
    # equal variances, x chosen so the log-odds equal log(9): posterior exactly 0.9 up to rounding
    m = model_1d(means=(1.0, 0.0), variances=(1.0, 1.0))
    x = np.log(9.0) + 0.5
    assert posterior_factual(m, [x]) == pytest.approx(0.9, abs=1e-12)
    assert classify_fact(m, [x]) is FactLabel.FACTUAL


@st.composite
def small_problem(draw):
    d = draw(st.integers(1, 8))
    n = draw(st.integers(2, 20))
    unit = st.floats(0, 1, allow_nan=False)
    X = draw(st.lists(st.lists(unit, min_size=d, max_size=d), min_size=n, max_size=n))
    y = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    y[0], y[1] = 1, 0
    x = draw(st.lists(unit, min_size=d, max_size=d))
    return np.array(X), y, np.array(x)


@given(small_problem())
def test_posterior_matches_brute_force(problem):
    X, y, x = problem
    m = train(X, y)
    expected = oracles.gaussian_posterior_factual(m.priors, m.means.tolist(), m.variances.tolist(), x)
    got = posterior_factual(m, x)
    # below the smallest normal double nothing is representable; compare absolutely there
    assert abs(got - float(expected)) <= 1e-9 * max(float(expected), 1e-300)
    assert abs(posterior_factual(m, x) + posterior_not_factual(m, x) - 1.0) <= 1e-12


@given(small_problem())
def test_classify_agrees_with_posterior(problem):
    X, y, x = problem
    m = train(X, y)
    p = posterior_factual(m, x)
    label = classify_fact(m, x)
    if p > 0.5:
        assert label is FactLabel.FACTUAL
    elif p < 0.5:
        assert label is FactLabel.NOT_FACTUAL


@given(small_problem(), st.randoms(use_true_random=False))
def test_training_order_invariant(problem, rnd):
    X, y, x = problem
    idx = list(range(len(y)))
    rnd.shuffle(idx)
    a = train(X, y)
    b = train(X[idx], [y[i] for i in idx])
    assert a.to_dict() == b.to_dict()
    assert posterior_factual(a, x) == posterior_factual(b, x)


def test_default_smoothing_scale_invariance_on_fixture():
    rng = np.random.default_rng(0)
    X = np.vstack([rng.normal(0.7, 0.1, (15, 8)), rng.normal(0.4, 0.15, (15, 8))]).clip(0, 1)
    y = [1] * 15 + [0] * 15
    test = rng.uniform(0, 1, (40, 8))
    base = [classify_fact(train(X, y), t) for t in test]
    for scale in (0.5, 0.75, 1.5, 2.0):
        scaled = train(X * scale, y)
        assert [classify_fact(scaled, t * scale) for t in test] == base


def test_judge_summary_worst_fact():
    m = model_1d(means=(1.0, 0.0), variances=(1.0, 1.0))
    xs = [[np.log(9.0) + 0.5], [np.log(0.25) + 0.5]]  # posteriors 0.9 and 0.2
    v = judge_summary(m, xs)
    assert v.fact_posteriors == pytest.approx((0.9, 0.2), abs=1e-12)
    assert v.summary_score == pytest.approx(0.2, abs=1e-12)
    assert v.summary_label is FactLabel.NOT_FACTUAL


def test_judge_single_fact():
    m = model_1d(means=(1.0, 0.0), variances=(1.0, 1.0))
    v = judge_summary(m, [[2.0]])
    assert v.summary_label is classify_fact(m, [2.0]) is FactLabel.FACTUAL
    assert v.summary_score == posterior_factual(m, [2.0])


def test_judge_no_facts():
    with pytest.raises(NoFacts):
        judge_summary(model_1d(), [])


@given(st.lists(st.floats(-4, 4), min_size=1, max_size=10), st.floats(-4, 4))
def test_appending_never_raises_score(xs, extra):
    m = model_1d(means=(1.0, -0.5), variances=(0.5, 2.0), priors=(0.3, 0.7))
    before = judge_summary(m, [[x] for x in xs])
    after = judge_summary(m, [[x] for x in xs] + [[extra]])
    assert after.summary_score <= before.summary_score
    if before.summary_label is FactLabel.NOT_FACTUAL:
        assert after.summary_label is FactLabel.NOT_FACTUAL


def test_model_file_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    m = train(rng.uniform(0, 1, (10, 8)), [1, 0] * 5)
    p = tmp_path / "model.json"
    save_model(m, p)
    d = json.loads(p.read_text())
    assert set(d) >= {"priors", "means", "variances", "var_smoothing", "feature_order"}
    assert d["feature_order"] == ["prede", "ente", "circe", "corefe", "linke", "oute", "grame", "supported"]
    back = load_model(p)
    assert back.to_dict() == m.to_dict()


def test_model_feature_order_enforced(tmp_path):
    m = train([[0.1], [0.9]], [1, 0])
    p = tmp_path / "m.json"
    save_model(m, p)
    with pytest.raises(ValueError, match="feature_order"):
        load_model(p)


def test_bernoulli_mode():
    X = [[0.9] * 8, [0.8] * 8, [0.1] * 8, [0.2] * 8]
    m = train_bernoulli(X, [1, 1, 0, 0])
    # add-one smoothing: (2 + 1) / (2 + 2)
    assert m.feature_probs[0, 0] == pytest.approx(0.75)
    assert classify_fact(m, FeatureVector((0.7,) * 8)) is FactLabel.FACTUAL
    assert classify_fact(m, FeatureVector((0.3,) * 8)) is FactLabel.NOT_FACTUAL
    assert model_from_dict(json.loads(json.dumps(m.to_dict()))).to_dict() == m.to_dict()
