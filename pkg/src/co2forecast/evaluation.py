"""Monte-Carlo benchmark harness, improvement tables, horizon sweeps and the
Friedman rank test."""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from sklearn.base import clone

from ._validation import as_series, check_horizon
from .exceptions import Co2ForecastError, UnknownBaseline, ZeroBaseline
from .series import ErrorReport, compute_errors, monte_carlo_patches

logger = logging.getLogger(__name__)

METRICS = ("rmse", "mae", "mape")


def _named(methods):
    if isinstance(methods, dict):
        items = list(methods.items())
    else:
        items = [m if isinstance(m, tuple) else (type(m).__name__, m) for m in methods]
    names = [n for n, _ in items]
    if len(set(names)) != len(names):
        raise ValueError(f"method names must be unique, got {names}")
    return items


def _mean(values):
    vals = [v for v in values if v is not None]
    if not vals:
        return None
    return math.fsum(vals) / len(vals)


@dataclass
class BenchmarkReport:
    """Per-patch errors for every method plus their arithmetic means.

    ``per_patch[name][k]`` is an :class:`ErrorReport`, or ``None`` when the
    method failed on patch ``k``; failed patches are left out of the means
    and counted in ``failures``.
    """

    methods: list
    per_patch: dict
    config: dict
    starts: list
    failures: dict = field(default_factory=dict)

    def mean(self, name, metric="rmse"):
        return _mean([getattr(r, metric) for r in self.per_patch[name] if r is not None])

    @property
    def means(self):
        return {name: {m: self.mean(name, m) for m in METRICS} for name in self.methods}

    def error_matrix(self, metric="rmse"):
        """``(methods x patches)`` array; NaN for failures."""
        return np.array([[np.nan if r is None or getattr(r, metric) is None else getattr(r, metric)
                          for r in self.per_patch[name]] for name in self.methods])

    def rows(self):
        """Table rows ``(method, rmse, mae, mape, n_failed)``."""
        return [{"method": name, **self.means[name], "failed": self.failures.get(name, 0)}
                for name in self.methods]

    def to_dict(self):
        return {
            "config": dict(self.config),
            "starts": list(self.starts),
            "methods": list(self.methods),
            "means": self.means,
            "failures": {n: self.failures.get(n, 0) for n in self.methods},
            "per_patch": {n: [None if r is None else r.as_dict() for r in self.per_patch[n]]
                          for n in self.methods},
        }

    @classmethod
    def from_dict(cls, d):
        per_patch = {n: [None if r is None else ErrorReport(**r) for r in rows]
                     for n, rows in d["per_patch"].items()}
        return cls(methods=list(d["methods"]), per_patch=per_patch, config=dict(d["config"]),
                   starts=list(d["starts"]), failures=dict(d["failures"]))

    def __eq__(self, other):
        return isinstance(other, BenchmarkReport) and self.to_dict() == other.to_dict()


def forecast_once(model, train, horizon):
    """Fit a fresh clone of ``model`` on ``train`` and forecast ``horizon`` steps."""
    return np.asarray(clone(model).fit(train).predict(horizon), dtype=float)


def run_benchmark(series, methods, n_patches=25, patch_len=1248, horizon=48, seed=0,
                  train_len=None):
    """Score every method on the same ``n_patches`` random patches.

    Each patch of ``patch_len`` points is split into ``train_len`` training
    points (default ``patch_len - horizon``) and the ``horizon`` points that
    follow.
    """
    horizon = check_horizon(horizon)
    x = as_series(series)
    items = _named(methods)
    train_len = patch_len - horizon if train_len is None else int(train_len)
    if train_len + horizon > patch_len:
        raise ValueError("train_len + horizon exceeds patch_len")
    patches = monte_carlo_patches(x.size, n_patches, patch_len, seed,
                                  horizon=patch_len - train_len)
    per_patch = {name: [] for name, _ in items}
    failures = {name: 0 for name, _ in items}
    for k, start in enumerate(patches.starts):
        train = x[start:start + train_len]
        truth = x[start + train_len:start + train_len + horizon]
        for name, model in items:
            try:
                fc = forecast_once(model, train, horizon)
                per_patch[name].append(compute_errors(truth, fc))
            except (Co2ForecastError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
                logger.warning("%s failed on patch %d (start %d): %s", name, k, start, exc)
                per_patch[name].append(None)
                failures[name] += 1
    config = {"n_patches": n_patches, "patch_len": patch_len, "horizon": horizon,
              "train_len": train_len, "seed": seed}
    return BenchmarkReport(methods=[n for n, _ in items], per_patch=per_patch, config=config,
                           starts=list(patches.starts), failures=failures)


@dataclass(frozen=True)
class FriedmanResult:
    statistic: float
    p_value: float
    k: int
    b: int

    @property
    def significant(self):
        return self.p_value < 0.05


def friedman_test(errors):
    """Friedman rank test.

    ``errors`` is a ``(k treatments, b blocks)`` array. Values are ranked
    within each block (ties share the average rank) and

        Q = 12 / (b k (k + 1)) * sum_j R_j^2 - 3 b (k + 1)

    is referred to a chi-square distribution with ``k - 1`` degrees of
    freedom. No tie correction is applied, so a block where all treatments
    agree contributes nothing.
    """
    E = np.asarray(errors, dtype=float)
    if E.ndim != 2:
        raise ValueError("errors must be a 2-D (treatments x blocks) array")
    k, b = E.shape
    if k < 2 or b < 2:
        raise ValueError(f"need at least 2 treatments and 2 blocks, got {k}x{b}")
    if not np.all(np.isfinite(E)):
        raise ValueError("errors contain NaN or infinite values")
    ranks = stats.rankdata(E, axis=0)
    R = ranks.sum(axis=1)
    q = 12.0 / (b * k * (k + 1)) * float(R @ R) - 3.0 * b * (k + 1)
    if abs(q) < 1e-9 * b * (k + 1):
        q = 0.0
    p = float(stats.chi2.sf(q, k - 1))
    return FriedmanResult(statistic=float(q), p_value=min(max(p, 0.0), 1.0), k=k, b=b)


def friedman_methods(report, metric="rmse"):
    """Methods as treatments, patches as blocks (patches where any method
    failed are dropped)."""
    E = report.error_matrix(metric)
    keep = ~np.isnan(E).any(axis=0)
    return friedman_test(E[:, keep])


def friedman_forecast_vs_realized(forecast, realized):
    """Forecast and realized values as two treatments, time steps as blocks."""
    f = np.asarray(forecast, dtype=float)
    r = np.asarray(realized, dtype=float)
    if f.shape != r.shape:
        raise ValueError("forecast and realized must have the same length")
    return friedman_test(np.vstack([f, r]))


def horizon_sweep(series, methods, horizons=(1, 3, 6, 12, 24, 48), seed=0, n_patches=25,
                  patch_len=1248):
    """Mean RMSE per ``(method, horizon)``.

    All horizons share the patch starts and the training length
    ``patch_len - max(horizons)``, so the curves are comparable.
    Returns ``(rows, reports)`` with rows sorted by horizon.
    """
    hs = sorted({check_horizon(h) for h in horizons})
    if not hs:
        raise ValueError("horizons must not be empty")
    train_len = patch_len - hs[-1]
    rows, reports = [], {}
    for h in hs:
        rep = run_benchmark(series, methods, n_patches, patch_len, h, seed, train_len=train_len)
        reports[h] = rep
        for name in rep.methods:
            rows.append({"method": name, "horizon": h, "rmse": rep.mean(name, "rmse")})
    return rows, reports


def improvement_table(report, baseline):
    """Percentage improvement of every method over ``baseline`` per metric:
    ``(baseline - method) / baseline * 100``. Negative means worse."""
    means = report.means if isinstance(report, BenchmarkReport) else report
    if baseline not in means:
        raise UnknownBaseline(f"baseline {baseline!r} not in report")
    base = means[baseline]
    table = {}
    for name, vals in means.items():
        row = {}
        for metric in METRICS:
            b, v = base.get(metric), vals.get(metric)
            if b is None or v is None:
                row[metric] = None
                continue
            if b == 0:
                raise ZeroBaseline(f"baseline {metric} is zero")
            row[metric] = 0.0 if v == b else (b - v) / b * 100.0
        table[name] = row
    return table
