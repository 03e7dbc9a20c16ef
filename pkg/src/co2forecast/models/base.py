"""Forecaster base class, multi-step strategies and the forecast container."""

import enum
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, clone
from sklearn.utils.validation import check_is_fitted

from .._validation import as_series, check_horizon


class Strategy(str, enum.Enum):
    """How a one-step model is rolled out over several steps.

    RECURSIVE fits once and feeds each prediction back as input. DIRREC
    appends each prediction and refits the model before the next step.
    """

    RECURSIVE = "recursive"
    DIRREC = "dirrec"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown strategy {value!r}; use 'recursive' or 'dirrec'") from None


@dataclass(frozen=True)
class Forecast:
    values: np.ndarray
    horizon: int
    origin: object = None

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        if arr.size != self.horizon:
            raise ValueError(f"forecast has {arr.size} values for horizon {self.horizon}")

    def __len__(self):
        return self.horizon

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


class BaseForecaster(BaseEstimator):
    """Univariate forecaster.

    Subclasses implement ``_fit(x)`` and ``_predict_next(history)``. The
    public ``predict(horizon)`` rolls the fitted model out recursively from
    the end of the training data; subclasses may override it with an
    equivalent closed form.
    """

    min_length = 1

    def fit(self, y, X=None):
        x = as_series(y, min_length=self.min_length)
        self._fit(x)
        self.y_ = x
        return self

    def predict_next(self, history):
        """One-step-ahead forecast given ``history`` (training data plus any
        values appended since)."""
        check_is_fitted(self, "y_")
        return float(self._predict_next(np.asarray(history, dtype=float)))

    def predict(self, horizon):
        check_is_fitted(self, "y_")
        horizon = check_horizon(horizon)
        history = list(self.y_)
        out = np.empty(horizon)
        for h in range(horizon):
            out[h] = self._predict_next(np.asarray(history))
            history.append(out[h])
        return out

    def _fit(self, x):
        raise NotImplementedError

    def _predict_next(self, history):
        raise NotImplementedError


def multi_step_forecast(model, series, horizon, strategy=Strategy.RECURSIVE):
    """Roll ``model`` (an unfitted template) out ``horizon`` steps.

    Recursive makes exactly one ``fit`` call, Dirrec exactly ``horizon``.
    """
    horizon = check_horizon(horizon)
    strategy = Strategy.parse(strategy)
    x = as_series(series)
    history = list(x)
    out = np.empty(horizon)
    if strategy is Strategy.RECURSIVE:
        fitted = clone(model).fit(x)
        for h in range(horizon):
            out[h] = fitted.predict_next(history)
            history.append(out[h])
    else:
        for h in range(horizon):
            fitted = clone(model).fit(np.asarray(history))
            out[h] = fitted.predict_next(history)
            history.append(out[h])
    return Forecast(out, horizon, _origin(series))


def _origin(series):
    start = getattr(series, "start_time", None)
    if start is None:
        return None
    return series.timestamp(len(series) - 1)


class PerfectForesight(BaseForecaster):
    """Forecaster that knows the future: predicts the true next values of
    ``truth``. Training data must be a contiguous slice of ``truth`` and is
    located by ``offset`` (its start index in ``truth``)."""

    def __init__(self, truth=None, offset=0):
        self.truth = truth
        self.offset = offset

    def _fit(self, x):
        self.truth_ = np.asarray(self.truth, dtype=float)

    def _predict_next(self, history):
        pos = self.offset + len(history)
        if pos >= self.truth_.size:
            raise IndexError("perfect-foresight forecaster ran past the end of the truth series")
        return self.truth_[pos]

    def forecast_from_origin(self, origin, horizon):
        return np.array(self.truth, dtype=float)[origin:origin + horizon]
