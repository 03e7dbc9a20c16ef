import numpy as np
import pytest
from scipy.signal import lfilter

from co2forecast.exceptions import SeriesTooShort
from co2forecast.models import (ArimaFit, ArimaForecaster, ArimaSpec, auto_arima_order,
                                fit_arima, forecast_arima)
from co2forecast.models.arima import (arima_objective, difference, integrate_forecast,
                                      min_root_modulus, select_d)


def simulate_arma(phi, theta, n, seed, burn=300):
    e = np.random.default_rng(seed).normal(size=n + burn)
    return lfilter(np.r_[1.0, theta], np.r_[1.0, -np.asarray(phi, dtype=float)], e)[burn:]


def _fit(phi=(), theta=(), mu=0.0, d=0, w_tail=(), e_tail=(), level_tail=()):
    return ArimaFit(spec=ArimaSpec(len(phi), d, len(theta)), ar_coeffs=tuple(phi),
                    ma_coeffs=tuple(theta), intercept=mu, innovation_variance=1.0, loglik=0.0,
                    n_obs=100, w_tail=tuple(w_tail), e_tail=tuple(e_tail),
                    level_tail=tuple(level_tail))


def test_ar1_recovery():
    x = simulate_arma([0.8], [], 2000, seed=1)
    fit = fit_arima(x, ArimaSpec(1, 0, 0))
    assert 0.75 <= fit.ar_coeffs[0] <= 0.85


def test_arma_recovery():
    x = simulate_arma([0.6], [0.4], 4000, seed=2)
    fit = fit_arima(x, ArimaSpec(1, 0, 1))
    assert fit.ar_coeffs[0] == pytest.approx(0.6, abs=0.06)
    assert fit.ma_coeffs[0] == pytest.approx(0.4, abs=0.06)
    assert fit.innovation_variance == pytest.approx(1.0, abs=0.08)


def test_constant_random_walk():
    fit = fit_arima(np.full(100, 3.5), ArimaSpec(0, 1, 0))
    np.testing.assert_allclose(forecast_arima(fit, 10).values, 3.5)


def test_mean_model():
    x = np.random.default_rng(0).normal(2.0, 1.0, 500)
    fit = fit_arima(x, ArimaSpec(0, 0, 0))
    assert abs(fit.intercept - x.mean()) < 1e-6
    model = ArimaForecaster(order=(0, 0, 0)).fit(x)
    assert np.all(model.predict(7) == fit.intercept)


def test_forecast_closed_forms():
    np.testing.assert_allclose(forecast_arima(_fit(phi=[0.5], w_tail=[8.0]), 3).values, [4, 2, 1])
    np.testing.assert_allclose(forecast_arima(_fit(d=1, level_tail=[7.0]), 4).values, 7.0)
    np.testing.assert_allclose(forecast_arima(_fit(mu=3.25), 5).values, 3.25)


def test_difference_round_trip():
    x = np.random.default_rng(1).normal(size=50).cumsum().cumsum()
    for d in range(3):
        w, tail = difference(x[:40], d)
        wf, _ = difference(x, d)
        np.testing.assert_allclose(integrate_forecast(wf[-10:], tail), x[40:], atol=1e-9)


@pytest.mark.parametrize("p,q,with_mean", [(1, 0, True), (2, 1, True), (0, 2, False), (3, 2, True)])
def test_gradient_matches_finite_differences(p, q, with_mean):
    w = simulate_arma([0.5, -0.2], [0.3], 400, seed=5) + (1.0 if with_mean else 0.0)
    rng = np.random.default_rng(p * 10 + q)
    n_par = p + q + with_mean
    for _ in range(20):
        params = rng.uniform(-0.4, 0.4, n_par)
        _, g = arima_objective(params, w, p, q, with_mean, max(p, 1))
        eps = 1e-6
        fd = np.empty(n_par)
        for i in range(n_par):
            up, dn = params.copy(), params.copy()
            up[i] += eps
            dn[i] -= eps
            fd[i] = (arima_objective(up, w, p, q, with_mean, max(p, 1))[0]
                     - arima_objective(dn, w, p, q, with_mean, max(p, 1))[0]) / (2 * eps)
        np.testing.assert_allclose(g, fd, rtol=1e-4, atol=1e-6)


def test_fitted_roots_outside_unit_circle():
    x = simulate_arma([0.9, -0.3], [0.7], 1500, seed=4)
    fit = fit_arima(x, ArimaSpec(2, 0, 1))
    assert min_root_modulus(fit) > 1 - 1e-6


def test_select_d_on_ramp():
    t = np.arange(300.0)
    x = 2.0 * t + np.random.default_rng(0).normal(0, 0.5, 300)
    assert select_d(x) >= 1
    assert auto_arima_order(x).d >= 1


def test_recovers_d_for_integrated_arma():
    # moderate coefficients: the differenced process has lag-1 correlation near 0.1
    hits = 0
    for seed in range(50):
        x = np.cumsum(simulate_arma([0.4, -0.3], [-0.3], 2000, seed=seed))
        hits += select_d(x) == 1
    assert hits >= 45
    x = np.cumsum(simulate_arma([0.4, -0.3], [-0.3], 2000, seed=0))
    assert auto_arima_order(x).d == 1


@pytest.mark.xfail(strict=True, reason="conditional-likelihood AICc over a 6x6 grid picks an "
                   "ARMA with cancelling roots for white noise in about half of the samples")
def test_white_noise_selects_mean_model():
    hits = sum(auto_arima_order(np.random.default_rng(s).normal(size=500)).as_tuple() == (0, 0, 0)
               for s in range(50))
    assert hits >= 45


def test_auto_order_short_series():
    with pytest.raises(SeriesTooShort):
        auto_arima_order(np.arange(40.0))


def test_estimator_api():
    x = simulate_arma([0.5], [], 300, seed=3)
    m = ArimaForecaster(order=(1, 0, 0)).fit(x)
    assert m.spec_ == ArimaSpec(1, 0, 0)
    assert m.get_params()["order"] == (1, 0, 0)
    closed = m.predict(12)
    hist = list(x)
    steps = []
    for _ in range(12):
        steps.append(m.predict_next(hist))
        hist.append(steps[-1])
    np.testing.assert_allclose(steps, closed, atol=1e-10)
