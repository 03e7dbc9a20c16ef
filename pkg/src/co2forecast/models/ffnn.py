"""Single-hidden-layer feed-forward network on lagged inputs (NNAR-style)."""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.special import expit

from .._rng import derive_rng
from .base import BaseForecaster, Strategy, multi_step_forecast

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FfnnSpec:
    lags: int = 28
    hidden: int = 14
    repeats: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.lags < 1 or self.hidden < 1 or self.repeats < 1:
            raise ValueError("lags, hidden and repeats must all be >= 1")


def lag_matrix(s, lags):
    """Rows ``s[t-lags:t]`` with target ``s[t]`` for every ``t >= lags``."""
    n = s.size
    X = np.lib.stride_tricks.sliding_window_view(s[:-1], lags)
    return X, s[lags:n]


class _Net:
    """Weights of one network packed into a flat vector."""

    def __init__(self, n_in, n_hidden):
        self.n_in, self.n_hidden = n_in, n_hidden
        self.size = n_in * n_hidden + n_hidden + n_hidden + 1

    def unpack(self, w):
        i, h = self.n_in, self.n_hidden
        W1 = w[:i * h].reshape(i, h)
        b1 = w[i * h:i * h + h]
        w2 = w[i * h + h:i * h + 2 * h]
        b2 = w[-1]
        return W1, b1, w2, b2

    def forward(self, w, X):
        W1, b1, w2, b2 = self.unpack(w)
        return expit(X @ W1 + b1) @ w2 + b2

    def loss_grad(self, w, X, y, decay):
        W1, b1, w2, b2 = self.unpack(w)
        H = expit(X @ W1 + b1)
        r = H @ w2 + b2 - y
        n = y.size
        loss = 0.5 * (r @ r) / n + 0.5 * decay * (W1.ravel() @ W1.ravel() + w2 @ w2)
        dH = np.outer(r, w2) * H * (1.0 - H) / n
        g = np.concatenate((
            (X.T @ dH + decay * W1).ravel(),
            dH.sum(axis=0),
            H.T @ r / n + decay * w2,
            [r.sum() / n],
        ))
        return loss, g


class FFNNForecaster(BaseForecaster):
    """Average of ``repeats`` sigmoid networks with one hidden layer.

    Inputs are the previous ``lags`` values, min-max scaled to [0, 1] on the
    training data; the output unit is linear. Network ``k`` is initialised
    from the stream ``(seed, "ffnn", k)`` and trained with L-BFGS on the
    mean squared one-step error.

    After ``fit``, ``converged_`` is False if any network failed to lower its
    loss below the initial value.
    """

    def __init__(self, lags=28, hidden=14, repeats=20, seed=0, max_iter=300, decay=0.0):
        self.lags = lags
        self.hidden = hidden
        self.repeats = repeats
        self.seed = seed
        self.max_iter = max_iter
        self.decay = decay

    @property
    def min_length(self):
        return self.lags + 21

    def _scale(self, x):
        return (np.asarray(x, dtype=float) - self.lo_) / self.span_

    def _fit(self, x):
        FfnnSpec(self.lags, self.hidden, self.repeats, self.seed)
        self.lo_ = float(x.min())
        span = float(x.max()) - self.lo_
        self.span_ = span if span > 0 else 1.0
        X, y = lag_matrix(self._scale(x), self.lags)
        net = _Net(self.lags, self.hidden)
        weights, converged = [], True
        for k in range(self.repeats):
            rng = derive_rng(self.seed, "ffnn", k)
            w0 = rng.uniform(-0.7, 0.7, size=net.size)
            loss0, _ = net.loss_grad(w0, X, y, self.decay)
            res = optimize.minimize(net.loss_grad, w0, args=(X, y, self.decay), jac=True,
                                    method="L-BFGS-B",
                                    options={"maxiter": self.max_iter, "gtol": 1e-10})
            if not res.fun < loss0:
                converged = False
            weights.append(res.x)
        if not converged:
            logger.warning("FFNN(%d,%d): a network did not reduce its training loss",
                           self.lags, self.hidden)
        self.net_ = net
        self.weights_ = weights
        self.converged_ = converged

    def _predict_next(self, history):
        z = self._scale(history[-self.lags:])[None, :]
        out = np.mean([self.net_.forward(w, z)[0] for w in self.weights_])
        return self.lo_ + self.span_ * out


def fit_forecast_ffnn(series, spec, horizon, strategy=Strategy.RECURSIVE):
    model = FFNNForecaster(lags=spec.lags, hidden=spec.hidden, repeats=spec.repeats, seed=spec.seed)
    return multi_step_forecast(model, series, horizon, strategy)
