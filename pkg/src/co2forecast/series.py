"""Hourly intensity series: container, CSV I/O, gap filling, splitting,
Monte-Carlo patch sampling and forecast error metrics."""

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

import numpy as np

from ._rng import derive_rng
from .exceptions import (
    EmptyFile,
    GapTooLong,
    LengthMismatch,
    MalformedRow,
    MissingAtBoundary,
    NonHourlyStep,
    OutOfRange,
    PatchTooLong,
)

HOUR = timedelta(hours=1)
TIMESTAMP_FORMAT = "%Y-%m-%dT%H:00:00Z"
DEFAULT_MAX_GAP = 6


def _frozen(values):
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


def parse_timestamp(text):
    """Parse an ISO-8601 UTC timestamp at hour resolution."""
    text = text.strip()
    try:
        if text.endswith("Z"):
            text = text[:-1] + "+00:00"
        ts = datetime.fromisoformat(text)
    except ValueError as exc:
        raise MalformedRow(f"bad timestamp {text!r}") from exc
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    ts = ts.astimezone(timezone.utc)
    if ts.minute or ts.second or ts.microsecond:
        raise MalformedRow(f"timestamp {text!r} is not on the hour")
    return ts


def format_timestamp(ts):
    return ts.astimezone(timezone.utc).strftime(TIMESTAMP_FORMAT)


@dataclass(frozen=True)
class HourlySeries:
    """Uniformly sampled hourly series in gCO2eq/kWh.

    Timestamps are implied by ``start_time + index`` hours. Missing hours are
    stored as NaN until :func:`fill_gaps` is applied.
    """

    start_time: datetime
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        start = self.start_time
        if start.tzinfo is None:
            start = start.replace(tzinfo=timezone.utc)
        start = start.astimezone(timezone.utc)
        if start.minute or start.second or start.microsecond:
            raise ValueError("start_time must be on the hour")
        object.__setattr__(self, "start_time", start)
        arr = _frozen(self.values)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("an HourlySeries needs at least one value")
        object.__setattr__(self, "values", arr)

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    @property
    def has_missing(self):
        return bool(np.isnan(self.values).any())

    def timestamp(self, index):
        return self.start_time + index * HOUR

    def timestamps(self):
        return [self.timestamp(i) for i in range(len(self))]

    def index_of(self, ts):
        """Position of timestamp ``ts`` (may fall outside the series)."""
        delta = ts.astimezone(timezone.utc) - self.start_time
        hours, rem = divmod(delta, HOUR)
        if rem:
            raise ValueError(f"{ts} is not aligned to the hourly grid")
        return int(hours)

    def slice(self, start, stop):
        """Sub-series ``[start, stop)`` with its own start time."""
        if not 0 <= start < stop <= len(self):
            raise OutOfRange(f"slice [{start}, {stop}) outside series of length {len(self)}")
        return HourlySeries(self.timestamp(start), self.values[start:stop])

    def with_values(self, values):
        return HourlySeries(self.start_time, values)

    def __repr__(self):
        return (f"HourlySeries(start_time={format_timestamp(self.start_time)}, "
                f"n={len(self)}, missing={int(np.isnan(self.values).sum())})")


def load_csv(path):
    """Read a ``timestamp,intensity`` CSV into an :class:`HourlySeries`.

    An empty intensity cell marks a missing hour. Rows must advance by
    exactly one hour; a gap or a duplicate raises :class:`NonHourlyStep`.
    """
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    if rows and rows[0] and rows[0][0].strip().lower() == "timestamp":
        rows = rows[1:]
    if not rows:
        raise EmptyFile(f"{path} contains no data rows")

    start = None
    prev = None
    values = []
    for lineno, row in enumerate(rows, start=2):
        if len(row) != 2:
            raise MalformedRow(f"line {lineno}: expected 2 columns, got {len(row)}")
        ts = parse_timestamp(row[0])
        cell = row[1].strip()
        if cell == "":
            value = math.nan
        else:
            try:
                value = float(cell)
            except ValueError as exc:
                raise MalformedRow(f"line {lineno}: bad number {cell!r}") from exc
            if not math.isfinite(value):
                raise MalformedRow(f"line {lineno}: non-finite value {cell!r}")
        if prev is None:
            start = ts
        elif ts - prev != HOUR:
            raise NonHourlyStep(
                f"line {lineno}: {format_timestamp(ts)} follows {format_timestamp(prev)}")
        prev = ts
        values.append(value)
    return HourlySeries(start, values)


def write_csv(series, path):
    """Write ``series`` in the same shape :func:`load_csv` reads.

    Values are written with ``repr`` so a write/read round trip is exact.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["timestamp", "intensity"])
        for i, v in enumerate(series.values):
            writer.writerow([format_timestamp(series.timestamp(i)),
                             "" if math.isnan(v) else repr(float(v))])


def fill_gaps(series, max_gap=DEFAULT_MAX_GAP):
    """Linearly interpolate runs of at most ``max_gap`` missing hours."""
    values = np.array(series.values, dtype=float)
    missing = np.isnan(values)
    if not missing.any():
        return series
    if missing[0] or missing[-1]:
        raise MissingAtBoundary("series starts or ends with missing values")

    # run-length encode the missing mask
    edges = np.diff(missing.astype(np.int8))
    run_starts = np.flatnonzero(edges == 1) + 1
    run_stops = np.flatnonzero(edges == -1) + 1
    for a, b in zip(run_starts, run_stops):
        if b - a > max_gap:
            raise GapTooLong(
                f"{b - a} missing hours from {format_timestamp(series.timestamp(a))} "
                f"exceed max_gap={max_gap}")

    idx = np.arange(values.size)
    values[missing] = np.interp(idx[missing], idx[~missing], values[~missing])
    return series.with_values(values)


def split_train_validation(series, train_len, horizon):
    """Split into ``[0, train_len)`` and ``[train_len, train_len + horizon)``."""
    if train_len < 1 or horizon < 1:
        raise OutOfRange("train_len and horizon must both be >= 1")
    if train_len + horizon > len(series):
        raise OutOfRange(
            f"train_len + horizon = {train_len + horizon} exceeds length {len(series)}")
    return series.slice(0, train_len), series.slice(train_len, train_len + horizon)


@dataclass(frozen=True)
class ErrorReport:
    """RMSE and MAE in series units, MAPE in percent.

    ``mape`` is ``None`` when an observed value is zero and the percentage
    error is undefined.
    """

    rmse: float
    mae: float
    mape: float | None
    n: int

    @property
    def mape_defined(self):
        return self.mape is not None

    def as_dict(self):
        return {"rmse": self.rmse, "mae": self.mae, "mape": self.mape, "n": self.n}


def compute_errors(observed, forecast):
    obs = np.asarray(getattr(observed, "values", observed), dtype=float)
    fc = np.asarray(getattr(forecast, "values", forecast), dtype=float)
    if obs.ndim != 1 or obs.shape != fc.shape:
        raise LengthMismatch(f"observed has shape {obs.shape}, forecast {fc.shape}")
    if obs.size < 1:
        raise LengthMismatch("cannot score an empty forecast")
    err = np.abs(obs - fc)
    rmse = float(np.sqrt(np.mean(err ** 2)))
    mae = float(np.mean(err))
    if np.any(obs == 0):
        mape = None
    else:
        mape = float(np.mean(err / np.abs(obs)) * 100.0)
    return ErrorReport(rmse=rmse, mae=mae, mape=mape, n=int(obs.size))


@dataclass(frozen=True)
class PatchSet:
    """Start indices of randomly drawn contiguous patches."""

    starts: tuple
    train_length: int
    horizon: int
    seed: int

    @property
    def patch_length(self):
        return self.train_length + self.horizon

    @property
    def patches(self):
        return [(s, self.train_length, self.horizon) for s in self.starts]

    def __len__(self):
        return len(self.starts)

    def __iter__(self):
        return iter(self.patches)


def monte_carlo_patches(series, n, patch_len, seed, horizon=48):
    """Draw ``n`` patch starts uniformly (with replacement) from the series."""
    length = len(series) if not isinstance(series, (int, np.integer)) else int(series)
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 1 <= horizon < patch_len:
        raise OutOfRange(f"horizon must lie in [1, patch_len), got {horizon}")
    if patch_len > length:
        raise PatchTooLong(f"patch_len {patch_len} exceeds series length {length}")
    rng = derive_rng(seed, "patches")
    starts = rng.integers(0, length - patch_len, size=n, endpoint=True)
    return PatchSet(starts=tuple(int(s) for s in starts), train_length=patch_len - horizon,
                    horizon=horizon, seed=int(seed))
