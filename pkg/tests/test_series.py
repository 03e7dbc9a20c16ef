import math
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from co2forecast.exceptions import (EmptyFile, GapTooLong, LengthMismatch, MalformedRow,
                                    MissingAtBoundary, NonHourlyStep, OutOfRange, PatchTooLong)
from co2forecast.series import (HourlySeries, compute_errors, fill_gaps, load_csv,
                                monte_carlo_patches, split_train_validation, write_csv)

T0 = datetime(2019, 1, 1, tzinfo=timezone.utc)


def _write(tmp_path, text):
    p = tmp_path / "in.csv"
    p.write_text(text)
    return p


def test_load_three_rows(tmp_path):
    p = _write(tmp_path, "timestamp,intensity\n2019-01-01T00:00:00Z,10\n"
                         "2019-01-01T01:00:00Z,20\n2019-01-01T02:00:00Z,30\n")
    s = load_csv(p)
    assert len(s) == 3
    assert s.start_time == T0
    np.testing.assert_array_equal(s.values, [10, 20, 30])


def test_load_rejects_skipped_hour(tmp_path):
    p = _write(tmp_path, "2019-01-01T00:00:00Z,10\n2019-01-01T02:00:00Z,20\n")
    with pytest.raises(NonHourlyStep):
        load_csv(p)


def test_load_empty_and_malformed(tmp_path):
    with pytest.raises(EmptyFile):
        load_csv(_write(tmp_path, "timestamp,intensity\n"))
    with pytest.raises(MalformedRow):
        load_csv(_write(tmp_path, "2019-01-01T00:00:00Z,abc\n"))
    with pytest.raises(MalformedRow):
        load_csv(_write(tmp_path, "2019-01-01T00:00:00Z\n"))


def test_missing_cell_is_nan(tmp_path):
    s = load_csv(_write(tmp_path, "2019-01-01T00:00:00Z,1\n2019-01-01T01:00:00Z,\n"
                                  "2019-01-01T02:00:00Z,3\n"))
    assert s.has_missing
    assert math.isnan(s.values[1])


def test_round_trip_1248(tmp_path):
    rng = np.random.default_rng(3)
    s = HourlySeries(T0, rng.normal(300, 40, 1248))
    write_csv(s, tmp_path / "x.csv")
    back = load_csv(tmp_path / "x.csv")
    assert len(back) == 1248
    assert back.start_time == s.start_time
    np.testing.assert_array_equal(back.values, s.values)


def test_values_are_read_only():
    s = HourlySeries(T0, [1.0, 2.0])
    with pytest.raises(ValueError):
        s.values[0] = 5


@pytest.mark.parametrize("values,max_gap,expected", [
    ([1, None, 3], 1, [1, 2, 3]),
    ([0, None, None, 3], 2, [0, 1, 2, 3]),
])
def test_fill_gaps(values, max_gap, expected):
    s = HourlySeries(T0, [np.nan if v is None else v for v in values])
    np.testing.assert_allclose(fill_gaps(s, max_gap).values, expected)


def test_fill_gaps_errors():
    with pytest.raises(GapTooLong):
        fill_gaps(HourlySeries(T0, [1, np.nan, np.nan, 4]), 1)
    with pytest.raises(MissingAtBoundary):
        fill_gaps(HourlySeries(T0, [np.nan, 1, 2]), 3)


def test_split():
    s = HourlySeries(T0, np.arange(1248.0))
    a, b = split_train_validation(s, 1200, 48)
    assert (len(a), len(b)) == (1200, 48)
    a, b = split_train_validation(HourlySeries(T0, np.arange(5.0)), 3, 2)
    np.testing.assert_array_equal(a.values, [0, 1, 2])
    np.testing.assert_array_equal(b.values, [3, 4])
    assert b.start_time == T0 + timedelta(hours=3)
    with pytest.raises(OutOfRange):
        split_train_validation(HourlySeries(T0, np.arange(10.0)), 10, 0)


def test_errors_examples():
    r = compute_errors([1, 2, 3], [1, 2, 3])
    assert (r.rmse, r.mae, r.mape) == (0, 0, 0)
    r = compute_errors([0, 0], [3, 4])
    assert r.rmse == pytest.approx(math.sqrt(12.5))
    assert r.mae == 3.5
    assert r.mape is None
    assert compute_errors([100], [90]).mape == pytest.approx(10.0)
    with pytest.raises(LengthMismatch):
        compute_errors([1, 2], [1])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(1, 1e4), st.floats(-1e4, 1e4)), min_size=1, max_size=50))
def test_error_ordering(pairs):
    obs, fc = zip(*pairs)
    r = compute_errors(obs, fc)
    assert r.rmse >= r.mae * (1 - 1e-12) >= 0
    assert r.mape >= 0
    assert r.n == len(pairs)


def test_patches():
    p = monte_carlo_patches(1248, 25, 1248, seed=11)
    assert p.starts == (0,) * 25
    p = monte_carlo_patches(1300, 200, 1248, seed=5)
    assert all(0 <= s <= 52 for s in p.starts)
    assert monte_carlo_patches(1300, 25, 1248, 9) == monte_carlo_patches(1300, 25, 1248, 9)
    assert p.train_length + p.horizon == 1248
    with pytest.raises(PatchTooLong):
        monte_carlo_patches(100, 3, 101, 0)
