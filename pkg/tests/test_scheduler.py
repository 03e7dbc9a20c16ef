import itertools
from datetime import datetime, timezone

import numpy as np
import pytest

from co2forecast.exceptions import BadDuration, InsufficientSpan, LengthMismatch
from co2forecast.models import ArimaForecaster, PerfectForesight
from co2forecast.scheduler import (DayAheadFrame, annual_savings, evaluate_schedule,
                                   random_baseline, ratio_stats, schedule_flexible)
from co2forecast.series import HourlySeries

T0 = datetime(2021, 3, 1, tzinfo=timezone.utc)


def _frame(window):
    fc = np.r_[np.full(12, 1e6), np.asarray(window, dtype=float), np.full(12, -1e6)]
    return DayAheadFrame(T0.replace(hour=12), fc)


def brute_force(window, d):
    """Lexicographically first subset (of those with the smallest sum)."""
    best, best_sum = None, np.inf
    for combo in itertools.combinations(range(24), d):
        s = sum(window[i] for i in combo)
        if s < best_sum:
            best, best_sum = combo, s
    return best


def test_ramp_and_ties():
    assert schedule_flexible(_frame(np.arange(24)), 4).chosen_hours == (0, 1, 2, 3)
    assert schedule_flexible(_frame(np.full(24, 5.0)), 4).chosen_hours == (0, 1, 2, 3)


def test_matches_brute_force_small_d():
    rng = np.random.default_rng(0)
    for _ in range(10):
        w = rng.integers(0, 6, 24).astype(float)  # plenty of ties
        for d in (1, 2, 3, 21, 22, 23, 24):
            assert schedule_flexible(_frame(w), d).chosen_hours == brute_force(list(w), d)


def test_forecast_mean_never_exceeds_window_mean():
    rng = np.random.default_rng(1)
    for _ in range(50):
        w = rng.normal(100, 20, 24)
        for d in range(1, 25):
            assert schedule_flexible(_frame(w), d).forecast_mean <= w.mean() + 1e-12


def test_bad_duration_and_lengths():
    for d in (0, 25, 2.5):
        with pytest.raises(BadDuration):
            schedule_flexible(_frame(np.arange(24)), d)
    with pytest.raises(LengthMismatch):
        DayAheadFrame(T0, np.zeros(47))
    res = schedule_flexible(_frame(np.arange(24)), 3)
    with pytest.raises(LengthMismatch):
        evaluate_schedule(res, np.zeros(23))


def test_evaluate_schedule():
    w = np.random.default_rng(2).normal(80, 10, 24)
    res = evaluate_schedule(schedule_flexible(_frame(w), 4), w)
    assert res.realized_mean == res.forecast_mean
    res = evaluate_schedule(schedule_flexible(_frame(w), 4), np.full(24, 61.5))
    assert res.realized_mean == 61.5


def test_random_baselines():
    r = np.arange(24.0)
    assert random_baseline(r, 4) == 4 * r.mean()
    blocks = [r[s:s + 4].sum() for s in range(21)]
    assert random_baseline(r, 4, contiguous=True) == pytest.approx(np.mean(blocks))


def _sinusoid_series(days=62):
    t = np.arange(24 * days)
    return HourlySeries(T0, 100 + 50 * np.sin(2 * np.pi * t / 24))


def test_perfect_foresight_savings():
    s = _sinusoid_series()
    rep = annual_savings(s, PerfectForesight(s.values), seed=0)
    assert rep.ratio[-1] == 1.0
    assert all(a <= b + 1e-15 for a, b in zip(rep.ratio, rep.ratio[1:]))
    # every day's window is the same full sine period
    window = np.sort(s.values[12:36])
    assert rep.ratio[3] == pytest.approx(window[:4].mean() / window.mean(), rel=1e-12)
    assert all(0 < r <= 1 for r in rep.ratio)


def test_ratio_24_is_one_for_any_forecaster():
    s = HourlySeries(T0, np.random.default_rng(3).uniform(50, 400, 24 * 61))
    rep = annual_savings(s, ArimaForecaster(order=(1, 0, 0)), durations=[1, 24], train_len=200)
    assert rep.ratio[-1] == 1.0
    rep = annual_savings(s, ArimaForecaster(order=(1, 0, 0)), durations=[24], train_len=200,
                         contiguous_baseline=True)
    assert rep.ratio == [1.0]


def test_savings_span_check():
    s = HourlySeries(T0, np.ones(24 * 30))
    with pytest.raises(InsufficientSpan):
        annual_savings(s, PerfectForesight(s.values))


def test_ratio_stats():
    s = _sinusoid_series()
    rows = ratio_stats(s, PerfectForesight(s.values), iterations=7, seed=1)
    assert len(rows) == 48
    assert all(r["mean"] == 1.0 and r["std"] == 0.0 and r["median"] == 1.0 for r in rows)
    assert len(ratio_stats(s, PerfectForesight(s.values), iterations=1)) == 48
    with pytest.raises(ValueError):
        ratio_stats(s, PerfectForesight(s.values), iterations=0)


def test_ratio_stats_spread_for_fitted_model():
    t = np.arange(24 * 61)
    s = HourlySeries(T0, 300 + 60 * np.sin(2 * np.pi * t / 24)
                     + np.random.default_rng(4).normal(0, 3, t.size))
    rows = ratio_stats(s, ArimaForecaster(order=(2, 0, 1)), iterations=5, train_len=500)
    assert max(r["std"] for r in rows) < 0.5
