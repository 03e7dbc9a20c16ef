"""Decomposition-based composite forecasters.

Method 1 splits the series with the classical moving-average decomposition
and forecasts seasonal, trend and random parts separately. Method 2 uses
EEMD with fine-to-coarse regrouping into high-frequency, low-frequency and
trend parts. Either way the forecast is the sum of the component forecasts.
"""

import enum
import logging
import math
import warnings

import numpy as np
from sklearn.base import clone

from ._rng import derive_seed
from ._validation import as_series, check_horizon
from .decomposition.classical import ClassicalDecomposer, decompose_classical, detect_period
from .decomposition.emd import EEMDDecomposer
from .exceptions import Co2ForecastError, NoDominantPeriod, SeriesTooShort
from .models.arima import ArimaForecaster
from .models.base import BaseForecaster, Forecast, Strategy, multi_step_forecast
from .models.ffnn import FFNNForecaster
from .models.psf import DPSFForecaster, PSFForecaster
from .series import compute_errors, monte_carlo_patches

logger = logging.getLogger(__name__)

DEFAULT_PERIOD = 24


class MethodId(str, enum.Enum):
    METHOD1 = "method1"
    METHOD2 = "method2"

    @property
    def roles(self):
        return ("seasonal", "trend", "random") if self is MethodId.METHOD1 else ("high", "low", "trend")


def method1_default_assignment():
    return {"seasonal": FFNNForecaster(lags=28, hidden=14),
            "trend": ArimaForecaster(),
            "random": ArimaForecaster()}


def method2_default_assignment():
    return {"high": ArimaForecaster(), "low": ArimaForecaster(), "trend": ArimaForecaster()}


PRESETS = {
    "france-2019": {
        MethodId.METHOD1: lambda: {"seasonal": FFNNForecaster(lags=28, hidden=14),
                                   "trend": ArimaForecaster(order=(1, 1, 0)),
                                   "random": ArimaForecaster(order=(3, 0, 1))},
        MethodId.METHOD2: lambda: {"high": ArimaForecaster(order=(2, 0, 3)),
                                   "low": ArimaForecaster(order=(1, 0, 0)),
                                   "trend": ArimaForecaster(order=(0, 2, 0))},
    },
}


def preset_assignment(name, method):
    try:
        return PRESETS[name][MethodId(method)]()
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {sorted(PRESETS)}") from None


def check_assignment(assignment, method):
    roles = MethodId(method).roles
    if set(assignment) != set(roles):
        raise ValueError(f"assignment must cover exactly {roles}, got {sorted(assignment)}")
    return assignment


_ROLE_INDEX = {"seasonal": 0, "trend": 1, "random": 2, "high": 3, "low": 4}


def _seeded(template, seed, role):
    model = clone(template)
    if "seed" in model.get_params():
        model.set_params(seed=derive_seed(seed, "component", _ROLE_INDEX[role]))
    return model


def _forecast_components(components, assignment, horizon, strategy, seed):
    out = {}
    for role, values in components.items():
        model = _seeded(assignment[role], seed, role)
        out[role] = multi_step_forecast(model, values, horizon, strategy).values
    return out


def _sum(parts, roles):
    total = np.zeros_like(parts[roles[0]])
    for role in roles:
        total = total + parts[role]
    return total


def _classical_components(x, period=None):
    if period is None:
        try:
            period = detect_period(x)
        except NoDominantPeriod:
            logger.warning("no dominant period found; using %d", DEFAULT_PERIOD)
            period = DEFAULT_PERIOD
    return decompose_classical(x, period)


class _CompositeForecaster(BaseForecaster):
    method = None

    def _decompose(self, x):
        raise NotImplementedError

    def _assignment(self):
        if self.assignment is None:
            defaults = {MethodId.METHOD1: method1_default_assignment,
                        MethodId.METHOD2: method2_default_assignment}
            return defaults[self.method]()
        return check_assignment(self.assignment, self.method)

    def _fit(self, x):
        self.components_ = self._decompose(x)
        self.assignment_ = self._assignment()

    def _forecast(self, components, horizon):
        roles = self.method.roles
        parts = _forecast_components(components, self.assignment_, horizon,
                                     Strategy.parse(self.strategy), self.seed)
        return parts, _sum(parts, roles)

    def predict(self, horizon):
        horizon = check_horizon(horizon)
        parts, total = self._forecast(self.components_, horizon)
        self.component_forecasts_ = parts
        return total

    def _predict_next(self, history):
        _, total = self._forecast(self._decompose(np.asarray(history)), 1)
        return total[0]


class Method1Forecaster(_CompositeForecaster):
    """Classical decomposition, then one model per component.

    Parameters
    ----------
    assignment : dict or None
        Maps ``"seasonal"``, ``"trend"``, ``"random"`` to unfitted
        forecasters. ``None`` uses FFNN(28, 14) for the seasonal part and
        automatically ordered ARIMA for the other two.
    period : int or None
        Seasonal period; ``None`` detects it from the periodogram.
    strategy : {"recursive", "dirrec"}
    seed : int
    """

    method = MethodId.METHOD1
    min_length = 48

    def __init__(self, assignment=None, period=None, strategy="recursive", seed=0):
        self.assignment = assignment
        self.period = period
        self.strategy = strategy
        self.seed = seed

    def _decompose(self, x):
        d = _classical_components(x, self.period)
        self.period_ = d.period
        return d.components()


class Method2Forecaster(_CompositeForecaster):
    """EEMD plus fine-to-coarse regrouping, then one model per component.

    ``assignment`` maps ``"high"``, ``"low"``, ``"trend"`` to unfitted
    forecasters (default: automatically ordered ARIMA for all three).
    """

    method = MethodId.METHOD2
    min_length = 200

    def __init__(self, assignment=None, strategy="recursive", ensemble_size=100,
                 noise_amplitude=0.2, seed=0, n_jobs=None):
        self.assignment = assignment
        self.strategy = strategy
        self.ensemble_size = ensemble_size
        self.noise_amplitude = noise_amplitude
        self.seed = seed
        self.n_jobs = n_jobs

    def _decomposer(self):
        return EEMDDecomposer(ensemble_size=self.ensemble_size,
                              noise_amplitude=self.noise_amplitude,
                              seed=derive_seed(self.seed, "eemd"), n_jobs=self.n_jobs)

    def _decompose(self, x):
        dec = self._decomposer().fit(x)
        self.imfs_ = dec.imfs_
        return dec.split_.components()


def _run(model, series, horizon, return_components):
    x = as_series(series)
    model.fit(x)
    values = model.predict(horizon)
    origin = series.timestamp(len(series) - 1) if hasattr(series, "start_time") else None
    fc = Forecast(values, horizon, origin)
    if return_components:
        return fc, model.component_forecasts_
    return fc


def forecast_method1(series, horizon, assignment=None, strategy=Strategy.RECURSIVE, seed=0,
                     period=None, return_components=False):
    model = Method1Forecaster(assignment=assignment, period=period,
                              strategy=Strategy.parse(strategy).value, seed=seed)
    return _run(model, series, horizon, return_components)


def forecast_method2(series, horizon, assignment=None, strategy=Strategy.RECURSIVE, seed=0,
                     ensemble_size=100, noise_amplitude=0.2, return_components=False):
    if len(as_series(series)) < 200:
        raise SeriesTooShort("Method 2 needs at least 200 points")
    model = Method2Forecaster(assignment=assignment, strategy=Strategy.parse(strategy).value,
                              ensemble_size=ensemble_size, noise_amplitude=noise_amplitude,
                              seed=seed)
    return _run(model, series, horizon, return_components)


def default_candidates():
    """ARIMA, FFNN, PSF and DPSF with the settings used across the package."""
    return [ArimaForecaster(), FFNNForecaster(lags=28, hidden=14), PSFForecaster(4, 3),
            DPSFForecaster(5, 3)]


def select_component_models(series, method, candidates=None, n_patches=10, patch_len=1200,
                            horizon=48, seed=0, period=None, ensemble_size=100):
    """Pick a forecaster per component by Monte-Carlo cross-validation.

    Each patch is ``patch_len`` training points followed by ``horizon``
    validation points. The training part is decomposed and every candidate
    forecasts every component; truth is the matching tail of the
    decomposition of the whole patch. The lowest mean RMSE wins, with mean
    MAE and then candidate order as tie-breakers. A candidate that fails on
    a patch scores infinity there.

    Returns ``(assignment, scores)`` where ``scores[role]`` lists
    ``(mean_rmse, mean_mae)`` per candidate.
    """
    method = MethodId(method)
    candidates = default_candidates() if candidates is None else list(candidates)
    if not candidates:
        raise ValueError("at least one candidate model is required")
    x = as_series(series)
    if x.size < patch_len + horizon:
        raise SeriesTooShort(f"need {patch_len + horizon} points for one patch, got {x.size}")
    patches = monte_carlo_patches(x.size, n_patches, patch_len + horizon, seed, horizon=horizon)
    roles = method.roles
    rmse = {r: np.zeros((len(candidates), n_patches)) for r in roles}
    mae = {r: np.zeros((len(candidates), n_patches)) for r in roles}

    for k, (start, train_len, h) in enumerate(patches):
        patch = x[start:start + train_len + h]
        train = patch[:train_len]
        if method is MethodId.METHOD1:
            d_train = _classical_components(train, period)
            comps_train = d_train.components()
            comps_full = decompose_classical(patch, d_train.period).components()
        else:
            dec = EEMDDecomposer(ensemble_size=ensemble_size, seed=derive_seed(seed, "eemd", k))
            comps_train = dec.fit(train).split_.components()
            comps_full = dec.fit(patch).split_.components()
        for role in roles:
            truth = comps_full[role][train_len:]
            for c, template in enumerate(candidates):
                model = _seeded(template, derive_seed(seed, "select", k), role)
                try:
                    fc = multi_step_forecast(model, comps_train[role], h)
                    err = compute_errors(truth, fc.values)
                    rmse[role][c, k], mae[role][c, k] = err.rmse, err.mae
                except (Co2ForecastError, ValueError, np.linalg.LinAlgError) as exc:
                    logger.warning("candidate %s failed on %s, patch %d: %s",
                                   type(template).__name__, role, k, exc)
                    rmse[role][c, k] = mae[role][c, k] = math.inf

    assignment, scores = {}, {}
    for role in roles:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            mean_rmse = rmse[role].mean(axis=1)
            mean_mae = mae[role].mean(axis=1)
        order = sorted(range(len(candidates)), key=lambda c: (mean_rmse[c], mean_mae[c], c))
        assignment[role] = clone(candidates[order[0]])
        scores[role] = [(float(a), float(b)) for a, b in zip(mean_rmse, mean_mae)]
    return assignment, scores


__all__ = [
    "ClassicalDecomposer", "EEMDDecomposer", "Method1Forecaster", "Method2Forecaster", "MethodId",
    "PRESETS", "default_candidates", "forecast_method1", "forecast_method2",
    "method1_default_assignment", "method2_default_assignment", "preset_assignment",
    "select_component_models",
]
