"""Day-ahead scheduling of flexible consumption against a 48-hour intensity
forecast, and the savings it yields against consuming at random hours.

A forecast is issued at 12:00 UTC on day D, when the day-ahead market
closes. It covers 48 hours from the issue time; indices 12..35 are the 24
hours of day D+1, the window that can actually be scheduled.
"""

import logging
from dataclasses import dataclass, replace
from datetime import timedelta

import numpy as np
from sklearn.base import clone

from ._rng import derive_rng, derive_seed
from ._validation import as_series
from .exceptions import BadDuration, InsufficientSpan, LengthMismatch, OutOfRange

logger = logging.getLogger(__name__)

FORECAST_HOURS = 48
WINDOW = slice(12, 36)
WINDOW_HOURS = 24
ISSUE_HOUR = 12
MIN_SPAN_DAYS = 60


@dataclass(frozen=True)
class DayAheadFrame:
    issue_time: object
    forecast: np.ndarray

    def __post_init__(self):
        fc = np.array(self.forecast, dtype=float)
        if fc.shape != (FORECAST_HOURS,):
            raise LengthMismatch(f"a day-ahead forecast has {FORECAST_HOURS} values, got {fc.size}")
        fc.setflags(write=False)
        object.__setattr__(self, "forecast", fc)

    @property
    def target_window(self):
        return self.forecast[WINDOW]


@dataclass(frozen=True)
class ScheduleResult:
    """``chosen_hours`` are window offsets (0 = 00:00 of day D+1), ascending."""

    chosen_hours: tuple
    forecast_mean: float
    realized_mean: float | None = None

    @property
    def duration(self):
        return len(self.chosen_hours)


def cheapest_hours(window, duration):
    """Indices of the ``duration`` smallest values, earliest first on ties,
    returned in ascending order."""
    w = np.asarray(window, dtype=float)
    if not 1 <= duration <= w.size:
        raise BadDuration(f"duration must be in 1..{w.size}, got {duration}")
    order = np.argsort(w, kind="stable")
    return np.sort(order[:duration])


def schedule_flexible(frame, duration):
    """Choose the ``duration`` hours of day D+1 with the lowest forecast."""
    if not isinstance(duration, (int, np.integer)) or not 1 <= duration <= WINDOW_HOURS:
        raise BadDuration(f"duration must be an integer in 1..{WINDOW_HOURS}, got {duration!r}")
    window = frame.target_window
    chosen = cheapest_hours(window, int(duration))
    return ScheduleResult(chosen_hours=tuple(int(i) for i in chosen),
                          forecast_mean=float(np.mean(window[chosen])))


def evaluate_schedule(result, realized):
    """Attach the realized mean intensity over the chosen hours."""
    r = np.asarray(realized, dtype=float)
    if r.shape != (WINDOW_HOURS,):
        raise LengthMismatch(f"need {WINDOW_HOURS} realized values, got {r.size}")
    chosen = np.asarray(result.chosen_hours, dtype=int)
    return replace(result, realized_mean=float(np.mean(r[chosen])))


def random_baseline(realized, duration, contiguous=False):
    """Expected emissions of consuming ``duration`` hours at random.

    By default the hours are a uniformly random set; with ``contiguous`` a
    uniformly placed block. Both expectations are computed exactly.
    """
    r = np.asarray(realized, dtype=float)
    if contiguous:
        starts = range(r.size - duration + 1)
        return duration * float(np.mean([np.mean(r[s:s + duration]) for s in starts]))
    return duration * float(np.mean(r))


def _forecast_at(method, values, origin, horizon, train_len, seed, task):
    """48-hour forecast issued at index ``origin`` from the preceding history."""
    if hasattr(method, "forecast_from_origin"):
        return np.asarray(method.forecast_from_origin(origin, horizon), dtype=float)
    model = clone(method)
    if "seed" in model.get_params():
        model.set_params(seed=derive_seed(seed, task, origin))
    history = values[max(0, origin - train_len):origin]
    return np.asarray(model.fit(history).predict(horizon), dtype=float)


def issue_indices(series, train_len, first=None, last=None):
    """Indices of every 12:00 UTC issue time with enough history before it
    and a full 48 realized hours after it, optionally bounded by dates."""
    n = len(series)
    start = series.start_time
    first_issue = start.replace(hour=ISSUE_HOUR)
    if first_issue < start:
        first_issue += timedelta(days=1)
    idx = series.index_of(first_issue)
    out = []
    while idx + FORECAST_HOURS <= n:
        if idx >= train_len:
            day = series.timestamp(idx).date()
            if (first is None or day >= first) and (last is None or day <= last):
                out.append(idx)
        idx += 24
    return out


@dataclass
class SavingsReport:
    durations: list
    scheduled: list
    baseline: list
    ratio: list
    n_days: int

    def rows(self):
        return [{"duration": d, "scheduled": s, "baseline": b, "ratio": r}
                for d, s, b, r in zip(self.durations, self.scheduled, self.baseline, self.ratio)]


def annual_savings(series, method, durations=range(1, 25), seed=0, train_len=1200,
                   first_day=None, last_day=None, contiguous_baseline=False):
    """Scheduled versus random-time emissions over every day of ``series``.

    For each issue day the forecast is scheduled for every duration ``d``;
    the scheduled emissions are ``d * V_V`` and the baseline is the exact
    expectation for random hours. The ratio is mean scheduled over mean
    baseline across days.
    """
    x = as_series(series)
    if x.size < MIN_SPAN_DAYS * 24:
        raise InsufficientSpan(f"need at least {MIN_SPAN_DAYS} days of data, got {x.size} hours")
    durations = sorted({int(d) for d in durations})
    for d in durations:
        if not 1 <= d <= WINDOW_HOURS:
            raise BadDuration(f"duration must be in 1..{WINDOW_HOURS}, got {d}")
    needs_history = not hasattr(method, "forecast_from_origin")
    origins = issue_indices(series, train_len if needs_history else 0, first_day, last_day)
    if not origins:
        raise InsufficientSpan("no issue day has enough history and realized data")

    sched = {d: [] for d in durations}
    base = {d: [] for d in durations}
    for origin in origins:
        fc = _forecast_at(method, x, origin, FORECAST_HOURS, train_len, seed, "savings")
        frame = DayAheadFrame(series.timestamp(origin), fc)
        realized = x[origin:origin + FORECAST_HOURS][WINDOW]
        for d in durations:
            res = evaluate_schedule(schedule_flexible(frame, d), realized)
            sched[d].append(d * res.realized_mean)
            base[d].append(random_baseline(realized, d, contiguous_baseline))

    scheduled = [float(np.mean(sched[d])) for d in durations]
    baseline = [float(np.mean(base[d])) for d in durations]
    ratio = [s / b for s, b in zip(scheduled, baseline)]
    return SavingsReport(durations=durations, scheduled=scheduled, baseline=baseline,
                         ratio=ratio, n_days=len(origins))


def ratio_stats(series, method, iterations=50, seed=0, train_len=1200):
    """Per-hour distribution of forecast / realized over random issue days.

    Returns 48 rows with ``hour`` (1-based lead time), ``mean``, ``std``,
    ``q1``, ``median`` and ``q3``.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    x = as_series(series)
    needs_history = not hasattr(method, "forecast_from_origin")
    origins = issue_indices(series, train_len if needs_history else 0)
    if not origins:
        raise InsufficientSpan("no issue day has enough history and realized data")
    rng = derive_rng(seed, "ratio-stats")
    picks = rng.integers(0, len(origins), size=iterations)
    ratios = np.empty((iterations, FORECAST_HOURS))
    for i, k in enumerate(picks):
        origin = origins[k]
        fc = _forecast_at(method, x, origin, FORECAST_HOURS, train_len, seed, "ratio-stats")
        realized = x[origin:origin + FORECAST_HOURS]
        if np.any(realized == 0):
            raise OutOfRange("realized intensity of zero makes the ratio undefined")
        ratios[i] = fc / realized
    q1, med, q3 = np.percentile(ratios, [25, 50, 75], axis=0)
    return [{"hour": h + 1, "mean": float(ratios[:, h].mean()), "std": float(ratios[:, h].std()),
             "q1": float(q1[h]), "median": float(med[h]), "q3": float(q3[h])}
            for h in range(FORECAST_HOURS)]
