import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from sklearn.base import clone

from co2forecast.decomposition import (ClassicalDecomposer, ClassicalDecomposition,
                                       decompose_classical, detect_period, reconstruct_classical)
from co2forecast.exceptions import LengthMismatch, NoDominantPeriod, SeriesTooShort


def _naive_centred_ma(x, P):
    """Moving average computed term by term, as the textbook writes it."""
    n, h = x.size, P // 2
    out = np.full(n, np.nan)
    for t in range(h, n - h):
        if P % 2:
            out[t] = x[t - h:t + h + 1].mean()
        else:
            out[t] = (0.5 * x[t - h] + x[t - h + 1:t + h].sum() + 0.5 * x[t + h]) / P
    return out


def test_period_of_sine():
    t = np.arange(480)
    assert detect_period(np.sin(2 * np.pi * t / 24)) == 24
    assert detect_period(300 + 40 * np.sin(2 * np.pi * t / 24) + 0.05 * t) == 24


def test_period_of_constant():
    with pytest.raises(NoDominantPeriod):
        detect_period(np.full(200, 7.0))


def test_constant_series():
    d = decompose_classical(np.full(240, 5.0), 24)
    np.testing.assert_allclose(d.trend, 5.0, atol=1e-12)
    np.testing.assert_allclose(d.seasonal, 0.0, atol=1e-12)
    np.testing.assert_allclose(d.random, 0.0, atol=1e-12)


def test_analytic_components():
    t = np.arange(1200)
    x = np.sin(2 * np.pi * t / 24) + 0.01 * t
    d = decompose_classical(x, 24)
    assert np.max(np.abs(d.seasonal - np.sin(2 * np.pi * t / 24))) < 0.02
    drift = d.trend[d.interior] - 0.01 * t[d.interior]
    assert np.max(np.abs(drift - drift.mean())) < 0.02


@pytest.mark.parametrize("P", [5, 12, 24])
def test_trend_matches_naive_ma(P):
    x = np.random.default_rng(P).normal(size=10 * P)
    d = decompose_classical(x, P)
    ref = _naive_centred_ma(x, P)
    np.testing.assert_allclose(d.trend[d.interior], ref[d.interior], rtol=0, atol=1e-12)


def test_seasonal_matches_phase_means():
    x = np.random.default_rng(1).normal(size=24 * 20)
    d = decompose_classical(x, 24)
    detr = x - d.trend
    idx = np.arange(x.size)[d.interior]
    means = np.array([detr[idx[idx % 24 == j]].mean() for j in range(24)])
    np.testing.assert_allclose(d.seasonal[:24], means - means.mean(), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.integers(48, 300), elements=st.floats(-1e3, 1e3)),
       st.sampled_from([2, 3, 7, 12, 24]))
def test_identity_and_periodicity(x, P):
    d = decompose_classical(x, P)
    assert d.seasonal.shape == d.trend.shape == d.random.shape == x.shape
    np.testing.assert_allclose(d.seasonal + d.trend + d.random, x, atol=1e-9)
    np.testing.assert_allclose(d.seasonal, np.tile(d.seasonal[:P], x.size // P + 1)[:x.size])
    assert abs(d.seasonal[:P].sum()) < 1e-9 * max(1.0, np.abs(x).max())


def test_reconstruct_and_length_checks():
    x = np.random.default_rng(0).normal(size=96)
    d = decompose_classical(x, 24)
    np.testing.assert_allclose(reconstruct_classical(d), x, atol=1e-9)
    z = np.zeros(10)
    np.testing.assert_array_equal(reconstruct_classical(ClassicalDecomposition(z, z, z, 2)), z)
    with pytest.raises(LengthMismatch):
        ClassicalDecomposition(np.zeros(10), np.zeros(9), np.zeros(10), 2)
    with pytest.raises(SeriesTooShort):
        decompose_classical(np.arange(30.0), 24)


def test_transformer_api():
    t = np.arange(480)
    x = 10 * np.sin(2 * np.pi * t / 24) + 0.1 * t
    dec = ClassicalDecomposer()
    Z = dec.fit_transform(x)
    assert dec.period_ == 24
    assert Z.shape == (480, 3)
    np.testing.assert_allclose(dec.inverse_transform(Z), x, atol=1e-9)
    assert clone(dec).get_params() == {"period": None}
