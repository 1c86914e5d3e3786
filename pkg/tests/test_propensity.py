import numpy as np
import pytest

from tiltbandit.core import Dataset, DatasetError
from tiltbandit.propensity import (
    MultinomialLogitModel,
    empirical_action_entropy,
    fit_propensity,
    mean_tv_distance,
    predict_propensity,
)
from tiltbandit.synthenv import SOFTMAX_LINEAR, EnvConfig, generate_dataset, logging_probs, sample_contexts


@pytest.fixture(scope="module")
def softmax_fit():
    cfg = EnvConfig(logging_kind=SOFTMAX_LINEAR)
    return cfg, fit_propensity(generate_dataset(cfg, 100_000, seed=0))


def test_zero_coefficients_uniform():
    m = MultinomialLogitModel(np.zeros((3, 6)))
    np.testing.assert_allclose(predict_propensity(m, (0.3, 0.9)), 1 / 3)


def test_floor_clamps_and_renormalises():
    # intercepts chosen so the raw softmax is (0.004, 0.496, 0.5)
    coef = np.zeros((3, 6))
    coef[:, 0] = np.log([0.004, 0.496, 0.5])
    m = MultinomialLogitModel(coef, floor=0.01)
    np.testing.assert_allclose(m.raw_probs([[0.5, 0.5]])[0], [0.004, 0.496, 0.5])
    p = predict_propensity(m, (0.5, 0.5))
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    assert p.min() >= 0.00994
    np.testing.assert_allclose(p, [0.01, 0.99 * 0.496 / 0.996, 0.99 * 0.5 / 0.996], atol=1e-12)


def test_shift_invariance():
    rng = np.random.default_rng(0)
    coef = rng.normal(size=(3, 6))
    shifted = coef + rng.normal(size=(1, 6))
    x = rng.random((50, 2))
    np.testing.assert_allclose(
        MultinomialLogitModel(coef).action_probs(x), MultinomialLogitModel(shifted).action_probs(x), atol=1e-12
    )


def test_recovers_softmax_logging_policy(softmax_fit):
    cfg, m = softmax_fit
    x = sample_contexts(cfg, 1000, np.random.default_rng(123))
    assert mean_tv_distance(m.action_probs(x), logging_probs(cfg, x)) < 0.02


def test_uniform_actions_fit_uniform():
    rng = np.random.default_rng(1)
    n = 100_000
    d = Dataset(rng.beta(2, 5, (n, 2)), rng.integers(-1, 2, n), np.zeros(n))
    m = fit_propensity(d)
    x = rng.beta(2, 5, (1000, 2))
    assert mean_tv_distance(m.action_probs(x), np.full((1000, 3), 1 / 3)) < 0.02


def test_beats_marginal_cross_entropy():
    d = generate_dataset(EnvConfig(), 20_000, seed=2)
    assert fit_propensity(d).cross_entropy(d) <= empirical_action_entropy(d)


def test_objective_non_increasing_at_small_lr():
    d = generate_dataset(EnvConfig(), 20_000, seed=3)
    hist = []
    fit_propensity(d, epochs=200, lr=0.01, history=hist)
    assert np.all(np.diff(hist) <= 1e-15)


def test_rejects_single_action():
    d = Dataset([[0.1, 0.2], [0.3, 0.1]], [0, 0], [0.0, 0.0])
    with pytest.raises(DatasetError):
        fit_propensity(d)


def test_fit_is_deterministic():
    d = generate_dataset(EnvConfig(), 5000, seed=4)
    a, b = fit_propensity(d, seed=1), fit_propensity(d, seed=2)
    np.testing.assert_array_equal(a.coef, b.coef)


def test_output_respects_floor():
    m = MultinomialLogitModel(np.random.default_rng(0).normal(scale=20, size=(3, 6)), floor=0.01)
    p = m.action_probs(np.random.default_rng(1).random((5000, 2)))
    assert p.min() >= 0.01 * (1 - 1e-12)
    np.testing.assert_allclose(p.sum(axis=1), 1, atol=1e-9)


def test_save_load_round_trip(tmp_path, softmax_fit):
    _, m = softmax_fit
    m.save(tmp_path / "m.csv")
    back = MultinomialLogitModel.load(tmp_path / "m.csv")
    np.testing.assert_array_equal(back.coef, m.coef)
    assert back.floor == m.floor
    assert (tmp_path / "m.csv").read_text().startswith("# kind=propensity,floor=0.01,features=quad-v1\n")
