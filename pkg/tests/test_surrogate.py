import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from primo.errors import DomainError
from primo.priors import Prior, PriorSet
from primo.surrogate import (
    AcquisitionContext,
    GPModel,
    acquire,
    acquisition_scores,
    ei,
    expected_improvement,
    fit_gp,
    gamma,
    gamma_pibo,
    gamma_pibo_original,
    posterior,
)


@pytest.fixture(scope="module")
def linear_fit():
    X = np.linspace(0, 1, 5)[:, None]
    return X, fit_gp(X, X.ravel())


def _ei_oracle(mu, sd, inc):
    z = (inc - mu) / sd
    return (inc - mu) * norm.cdf(z) + sd * norm.pdf(z)


def test_interpolates_noiseless_data(linear_fit):
    X, model = linear_fit
    mean, _ = model.predict(X)
    np.testing.assert_allclose(mean, X.ravel(), atol=1e-3)


def test_variance_small_at_data_large_far_away():
    X = np.array([[0.1, 0.1], [0.2, 0.15], [0.15, 0.3]])
    model = GPModel.build(X, [1.0, 2.0, 0.5], lengthscales=0.1, signal_var=1.0, noise_var=1e-6)
    _, v_train = posterior(model, X[0])
    assert v_train <= (1e-6 + 1e-6) * model.y_std**2
    _, v_far = posterior(model, [0.95, 0.95])
    assert v_far == pytest.approx(model.signal_var * model.y_std**2, rel=0.05)


def test_constant_targets():
    X = np.random.default_rng(0).random((6, 2))
    model = fit_gp(X, np.full(6, 3.0))
    mean, _ = model.predict(np.random.default_rng(1).random((20, 2)))
    np.testing.assert_allclose(mean, 3.0, atol=1e-9)


def test_fit_is_deterministic():
    rng = np.random.default_rng(5)
    X, y = rng.random((8, 3)), rng.random(8)
    a, b = fit_gp(X, y), fit_gp(X, y)
    np.testing.assert_array_equal(a.lengthscales, b.lengthscales)
    np.testing.assert_array_equal(a.alpha, b.alpha)


def test_hyperparameters_in_bounds():
    rng = np.random.default_rng(6)
    model = fit_gp(rng.random((10, 2)), rng.random(10))
    assert np.all((model.lengthscales >= 1e-3) & (model.lengthscales <= 1e3))


def test_fit_needs_two_points():
    with pytest.raises(DomainError):
        fit_gp([[0.5]], [1.0])


def test_mean_is_continuous(linear_fit):
    _, model = linear_fit
    m0, _ = posterior(model, [0.37])
    m1, _ = posterior(model, [0.37 + 1e-9])
    assert abs(m0 - m1) < 1e-6


def test_ei_closed_form_examples():
    assert expected_improvement(1.0, 0.0, 1.0) == 0.0
    assert expected_improvement(0.7, 0.0, 1.0) == pytest.approx(0.3)
    assert expected_improvement(0.0, 1.0, 0.0) == pytest.approx(0.3989423, abs=1e-7)


@settings(max_examples=200, deadline=None)
@given(st.floats(-5, 5), st.floats(1e-3, 10), st.floats(-5, 5))
def test_ei_matches_oracle(mu, sd, inc):
    assert expected_improvement(mu, sd, inc) == pytest.approx(_ei_oracle(mu, sd, inc), rel=1e-7, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(-1e3, 1e3), st.floats(0, 1e3), st.floats(-1e3, 1e3))
def test_ei_non_negative(mu, sd, inc):
    assert expected_improvement(mu, sd, inc) >= 0


def test_log_ei_finite_deep_in_tail(linear_fit):
    _, model = linear_fit
    scores = acquisition_scores(model, np.linspace(0, 1, 11)[:, None], incumbent=-50.0)
    assert np.all(np.isfinite(scores))


def test_ei_function_agrees_with_posterior(linear_fit):
    _, model = linear_fit
    mu, var = posterior(model, [0.33])
    assert ei(model, [0.33], 0.2) == pytest.approx(_ei_oracle(mu, np.sqrt(var), 0.2), rel=1e-9)


def test_gamma_examples():
    assert gamma(0, 4) == 1.0
    assert gamma(3, 4) == pytest.approx(0.105399, abs=1e-6)
    assert gamma(10, 4) == pytest.approx(1.39e-11, rel=0.01)
    assert gamma_pibo(4, 4) == pytest.approx(np.exp(-1))
    with pytest.raises(NotImplementedError):
        gamma_pibo_original(1, 2)


@given(st.integers(0, 50), st.integers(1, 20))
def test_gamma_strictly_decreasing(n, d):
    if gamma(n + 1, d) > 0:
        assert gamma(n + 1, d) < gamma(n, d)


def _setup(seed=0):
    rng = np.random.default_rng(seed)
    X = rng.random((8, 2))
    y = np.sum((X - 0.3) ** 2, axis=1)
    return X, y, fit_gp(X, y)


def test_epsilon_one_never_consults_prior():
    X, y, model = _setup()
    ctx = AcquisitionContext(X, y, n_bo=0, epsilon=1.0)
    priors = PriorSet((Prior(mean=[0.9, 0.9], sigma=0.05),))
    a = acquire(ctx, model, priors, np.random.default_rng(3), candidate_budget=64)
    b = acquire(ctx, model, None, np.random.default_rng(3), candidate_budget=64)
    assert a.prior_index is None and a.exponent == 0.0
    np.testing.assert_array_equal(a.x, b.x)


def test_prior_branch_reports_exponent():
    X, y, model = _setup()
    ctx = AcquisitionContext(X, y, n_bo=1, epsilon=0.0)
    priors = PriorSet((Prior(mean=[0.9, 0.9], sigma=0.05),))
    p = acquire(ctx, model, priors, np.random.default_rng(0), candidate_budget=64)
    assert p.prior_index == 0
    assert p.exponent == pytest.approx(gamma(1, 2))
    assert np.all((p.x >= 0) & (p.x <= 1))


def test_missing_priors_fall_back_to_ei():
    X, y, model = _setup()
    ctx = AcquisitionContext(X, y, epsilon=0.0)
    p = acquire(ctx, model, None, np.random.default_rng(0), candidate_budget=32)
    assert p.prior_index is None


def test_vanishing_exponent_matches_plain_ei():
    X, y, model = _setup()
    U = np.random.default_rng(1).random((200, 2))
    prior = Prior(mean=[0.9, 0.1], sigma=0.1)
    plain = acquisition_scores(model, U, y.min())
    weighted = acquisition_scores(model, U, y.min(), prior, gamma(40, 2))
    assert np.argmax(plain) == np.argmax(weighted)


def test_prior_scaling_keeps_argmax():
    X, y, model = _setup()
    U = np.random.default_rng(2).random((200, 2))
    prior = Prior(mean=[0.6, 0.4], sigma=0.2)
    base = acquisition_scores(model, U, y.min(), prior, 0.7)
    # a constant factor c on the density adds exponent * log(c)
    assert np.argmax(base + 0.7 * np.log(17.0)) == np.argmax(base)


def test_context_validation():
    with pytest.raises(DomainError):
        AcquisitionContext(np.zeros((2, 1)), [0, 1], epsilon=1.5)
    with pytest.raises(DomainError):
        AcquisitionContext(np.zeros((2, 1)), [0, 1], n_bo=-1)
    ctx = AcquisitionContext([[0.1], [0.2]], [3.0, 1.0])
    assert ctx.incumbent == 1.0 and ctx.incumbent_x.tolist() == [0.2]
