"""Additive seasonal/trend/random decomposition by centred moving averages."""

from dataclasses import dataclass

import numpy as np
from scipy import signal
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import as_series
from ..exceptions import LengthMismatch, NoDominantPeriod, SeriesTooShort


@dataclass(frozen=True)
class ClassicalDecomposition:
    seasonal: np.ndarray
    trend: np.ndarray
    random: np.ndarray
    period: int

    def __post_init__(self):
        n = {len(self.seasonal), len(self.trend), len(self.random)}
        if len(n) != 1:
            raise LengthMismatch(f"component lengths differ: {sorted(n)}")

    @property
    def interior(self):
        """Slice of indices where the moving average is natively defined."""
        half = self.period // 2
        return slice(half, len(self.trend) - half)

    def components(self):
        return {"seasonal": self.seasonal, "trend": self.trend, "random": self.random}


def detect_period(y, min_period=2):
    """Dominant integer period from the periodogram of the linearly detrended series.

    Bins whose period falls outside ``[min_period, len(y) / 2]`` are ignored.
    """
    raw = as_series(y, min_length=2 * max(min_period, 2))
    x = signal.detrend(raw, type="linear")
    n = x.size
    scale = max(1.0, float(np.max(np.abs(raw))))
    if np.max(np.abs(x)) <= 1e-9 * scale:
        raise NoDominantPeriod("series has no energy beyond a linear trend")
    power = np.abs(np.fft.rfft(x)) ** 2
    k = np.arange(power.size)
    periods = n / np.maximum(k, 1)
    valid = (k > 0) & (periods >= min_period) & (periods <= n / 2)
    if not valid.any():
        raise NoDominantPeriod("series too short for any candidate period")
    best = np.flatnonzero(valid)[np.argmax(power[valid])]
    return int(round(periods[best]))


def _moving_average_filter(period):
    if period % 2 == 0:
        # 2xP centred moving average for even periods
        w = np.ones(period + 1)
        w[0] = w[-1] = 0.5
        return w / period
    return np.ones(period) / period


def _extrapolate_edges(trend, half, period):
    """Fill the ``half`` undefined points at each end by a straight line
    fitted to the nearest ``period`` valid trend values."""
    n = trend.size
    valid_idx = np.arange(half, n - half)
    seg = min(period, valid_idx.size)
    if half == 0:
        return trend
    head = valid_idx[:seg]
    slope, icpt = np.polyfit(head, trend[head], 1) if seg > 1 else (0.0, trend[head[0]])
    trend[:half] = slope * np.arange(half) + icpt
    tail = valid_idx[-seg:]
    slope, icpt = np.polyfit(tail, trend[tail], 1) if seg > 1 else (0.0, trend[tail[0]])
    trend[n - half:] = slope * np.arange(n - half, n) + icpt
    return trend


def decompose_classical(y, period):
    """Four-step additive decomposition.

    1. trend: centred moving average of width ``period`` (2xP for even P),
       edges linearly extrapolated;
    2. detrend;
    3. seasonal index per phase ``t mod period`` from interior points,
       centred to sum to zero and tiled;
    4. random = y - trend - seasonal.
    """
    x = as_series(y)
    period = int(period)
    if period < 2:
        raise ValueError(f"period must be >= 2, got {period}")
    if x.size < 2 * period:
        raise SeriesTooShort(f"need at least {2 * period} points for period {period}")

    half = period // 2
    filt = _moving_average_filter(period)
    trend = np.empty_like(x)
    trend[half:x.size - half] = np.convolve(x, filt, mode="valid")
    trend = _extrapolate_edges(trend, half, period)

    detrended = x - trend
    phase = np.arange(x.size) % period
    inner = np.zeros(x.size, dtype=bool)
    inner[half:x.size - half] = True
    sums = np.bincount(phase[inner], weights=detrended[inner], minlength=period)
    counts = np.bincount(phase[inner], minlength=period)
    index = sums / counts
    index -= index.mean()
    seasonal = index[phase]

    random = x - trend - seasonal
    return ClassicalDecomposition(seasonal=seasonal, trend=trend, random=random, period=period)


def reconstruct_classical(d):
    if not len(d.seasonal) == len(d.trend) == len(d.random):
        raise LengthMismatch("component lengths differ")
    return np.asarray(d.seasonal) + np.asarray(d.trend) + np.asarray(d.random)


class ClassicalDecomposer(TransformerMixin, BaseEstimator):
    """Transformer wrapper: ``transform`` returns an ``(n, 3)`` array with
    columns seasonal, trend, random.

    Parameters
    ----------
    period : int or None
        Seasonal period in hours. ``None`` estimates it with
        :func:`detect_period` during ``fit``.
    """

    component_names = ("seasonal", "trend", "random")

    def __init__(self, period=None):
        self.period = period

    def fit(self, y, X=None):
        x = as_series(y)
        self.period_ = int(self.period) if self.period is not None else detect_period(x)
        self.decomposition_ = decompose_classical(x, self.period_)
        return self

    def transform(self, y):
        check_is_fitted(self, "period_")
        d = decompose_classical(as_series(y), self.period_)
        return np.column_stack([d.seasonal, d.trend, d.random])

    def fit_transform(self, y, X=None):
        self.fit(y)
        d = self.decomposition_
        return np.column_stack([d.seasonal, d.trend, d.random])

    def inverse_transform(self, components):
        return np.asarray(components).sum(axis=1)
