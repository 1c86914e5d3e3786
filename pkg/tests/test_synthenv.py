import numpy as np
import pytest
from scipy import integrate, stats

from tiltbandit.core import Action, Context, save_dataset
from tiltbandit.policies import ConstantPolicy, UniformPolicy
from tiltbandit.synthenv import (
    SOFTMAX_LINEAR,
    EnvConfig,
    EnvOracle,
    LoggingPolicy,
    expected_losses_quadrature,
    generate_dataset,
    logging_propensities,
    sample_context,
    sample_contexts,
    simulate_transition,
    transition,
)


def test_uniform_shapes_give_uniform_marginals():
    x = sample_contexts(EnvConfig(context_shape_a=1, context_shape_b=1), 100_000, np.random.default_rng(0))
    for col in x.T:
        assert stats.kstest(col, "uniform").statistic < 0.01


def test_default_context_mean():
    q = sample_contexts(EnvConfig(), 100_000, np.random.default_rng(1))[:, 0]
    assert abs(q.mean() - 2 / 7) < 3 * q.std() / np.sqrt(len(q))


def test_context_stream_is_deterministic():
    a = [sample_context(EnvConfig(), np.random.default_rng(5)) for _ in range(2)]
    assert a[0] == a[1]


def test_rule_based_propensities():
    cfg = EnvConfig()
    np.testing.assert_allclose(logging_propensities(cfg, Context(0.1, 0.1)), [0.05, 0.90, 0.05])
    np.testing.assert_allclose(logging_propensities(cfg, Context(0.8, 0.2)), [0.90, 0.05, 0.05])
    np.testing.assert_allclose(logging_propensities(cfg, Context(0.2, 0.8)), [0.05, 0.05, 0.90])


@pytest.mark.parametrize("kind", ["rule", SOFTMAX_LINEAR])
def test_propensities_respect_floor(kind):
    cfg = EnvConfig(logging_kind=kind)
    x = np.random.default_rng(0).random((10_000, 2))
    p = LoggingPolicy(cfg).action_probs(x)
    assert p.min() >= 0.05 - 1e-12
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)


def test_softmax_floor_binds_when_coefficients_are_extreme():
    cfg = EnvConfig(logging_kind=SOFTMAX_LINEAR, softmax_coefs=(0, 10, 0, 0, 0, 0, 0, 0, 0))
    p = logging_propensities(cfg, Context(1.0, 0.0))
    assert p.min() == pytest.approx(0.05)
    assert p.sum() == pytest.approx(1.0)


def test_transition_no_change_noiseless():
    cfg = EnvConfig(noise_std=0.0)
    nxt, loss = simulate_transition(cfg, Context(0.3, 0.4), Action.NO_CHANGE, np.random.default_rng(0))
    assert nxt == Context(0.3, 0.4) and loss == 0.0


def test_transition_up_tilt_noiseless():
    cfg = EnvConfig(noise_std=0.0, effect_magnitude=0.1)
    nxt, loss = simulate_transition(cfg, Context(0.5, 0.2), Action.UP_TILT, np.random.default_rng(0))
    np.testing.assert_allclose(nxt, (0.4, 0.3))
    assert loss == pytest.approx(-0.1)


def test_transition_down_tilt_clips():
    cfg = EnvConfig(noise_std=0.0, effect_magnitude=0.1)
    nxt, loss = simulate_transition(cfg, Context(0.05, 0.2), Action.DOWN_TILT, np.random.default_rng(0))
    np.testing.assert_allclose(nxt, (0.15, 0.1))
    assert loss == pytest.approx(-0.05)


def test_reversed_sign_convention():
    cfg = EnvConfig(noise_std=0.0, tilt_sign=-1)
    nxt, _ = simulate_transition(cfg, Context(0.5, 0.2), Action.UP_TILT, np.random.default_rng(0))
    np.testing.assert_allclose(nxt, (0.6, 0.1))


def test_swap_symmetry_with_matched_noise():
    cfg = EnvConfig()
    rng = np.random.default_rng(3)
    x = rng.random((1000, 2))
    noise = rng.standard_normal((1000, 2))
    for k in range(3):
        nxt, loss = transition(cfg, x, np.full(1000, k), noise)
        nxt_s, loss_s = transition(cfg, x[:, ::-1], np.full(1000, 2 - k), noise[:, ::-1])
        np.testing.assert_allclose(nxt_s, nxt[:, ::-1])
        np.testing.assert_allclose(loss_s, loss)


def test_generated_data_properties():
    d = generate_dataset(EnvConfig(), 100_000, seed=0)
    frac = np.mean(d.actions == 0)
    assert 0.6 <= frac <= 0.95
    assert np.abs(d.losses).max() <= 1
    assert d.propensity.min() >= 0.05
    assert "seed=0" in d.provenance


def test_generated_propensity_matches_policy():
    cfg = EnvConfig(logging_kind=SOFTMAX_LINEAR)
    d = generate_dataset(cfg, 200, seed=4)
    p = LoggingPolicy(cfg).action_probs(d.contexts)[np.arange(200), d.action_index]
    np.testing.assert_array_equal(d.propensity, p)


def test_generate_single_sample_and_rejects_zero():
    assert len(generate_dataset(EnvConfig(), 1, seed=0)) == 1
    with pytest.raises(ValueError):
        generate_dataset(EnvConfig(), 0, seed=0)


def test_generation_is_byte_deterministic(tmp_path):
    for name in "ab":
        save_dataset(generate_dataset(EnvConfig(), 1000, seed=7), tmp_path / f"{name}.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_oracle_noiseless_equals_deterministic_loss():
    o = EnvOracle(EnvConfig(noise_std=0.0), n_mc=10)
    est = o.expected_loss(Context(0.5, 0.2), Action.UP_TILT)
    assert est.value == pytest.approx(-0.1) and est.std_error == 0


def max_of_gaussians_mean(mu1, mu2, sd):
    # independent 2-D quadrature of E[max(X, Y)], X ~ N(mu1, sd^2), Y ~ N(mu2, sd^2)
    f = lambda y, x: max(x, y) * stats.norm.pdf(x, mu1, sd) * stats.norm.pdf(y, mu2, sd)
    lo, hi = min(mu1, mu2) - 8 * sd, max(mu1, mu2) + 8 * sd
    val, _ = integrate.dblquad(f, lo, hi, lo, hi, epsabs=1e-10)
    return val


@pytest.mark.parametrize("x", [(0.4, 0.45), (0.5, 0.5), (0.7, 0.35)])
def test_oracle_no_change_matches_max_of_gaussians(x):
    cfg = EnvConfig()
    est = EnvOracle(cfg, n_mc=200_000).expected_loss(Context(*x), Action.NO_CHANGE)
    truth = max_of_gaussians_mean(x[0], x[1], cfg.noise_std) - max(x)
    assert abs(est.value - truth) < 3 * est.std_error


def test_oracle_symmetric_context_up_equals_down():
    o = EnvOracle(EnvConfig(), n_mc=200_000)
    up = o.expected_loss(Context(0.3, 0.3), Action.UP_TILT)
    down = EnvOracle(EnvConfig(), n_mc=200_000, seed=99).expected_loss(Context(0.3, 0.3), Action.DOWN_TILT)
    assert abs(up.value - down.value) < 3 * np.hypot(up.std_error, down.std_error)


def test_quadrature_agrees_with_monte_carlo():
    cfg = EnvConfig()
    o = EnvOracle(cfg, n_mc=200_000)
    x = [(0.02, 0.3), (0.5, 0.2), (0.97, 0.9)]
    quad = expected_losses_quadrature(cfg, x)
    for i, ctx in enumerate(x):
        for a in Action:
            est = o.expected_loss(Context(*ctx), a)
            assert abs(quad[i, a.index] - est.value) < 4 * est.std_error + 1e-9


def test_oracle_risk_always_no_change_noiseless_is_zero():
    o = EnvOracle(EnvConfig(noise_std=0.0), n_mc=1000)
    assert o.risk(ConstantPolicy(Action.NO_CHANGE)).value == 0.0


def test_oracle_risk_uniform_decomposes():
    cfg = EnvConfig()
    uni = EnvOracle(cfg, n_mc=100_000, seed=1).risk(UniformPolicy())
    parts = [EnvOracle(cfg, n_mc=100_000, seed=10 + a.index).risk(ConstantPolicy(a)) for a in Action]
    avg = np.mean([p.value for p in parts])
    se = np.hypot(uni.std_error, np.sqrt(sum(p.std_error**2 for p in parts)) / 3)
    assert abs(uni.value - avg) < 3 * se


def test_greedy_oracle_beats_logging():
    cfg = EnvConfig()
    o = EnvOracle(cfg, n_mc=100_000)
    gap = o.risk_gap(o.greedy_policy(), LoggingPolicy(cfg))
    assert gap.value + 3 * gap.std_error < 0


def test_config_validation():
    with pytest.raises(ValueError):
        EnvConfig(logging_smoothing=0.4)
    with pytest.raises(ValueError):
        EnvConfig(logging_kind="fuzzy")
    assert EnvConfig().digest() == EnvConfig().digest() != EnvConfig(noise_std=0.1).digest()
