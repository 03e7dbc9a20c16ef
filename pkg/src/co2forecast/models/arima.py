"""ARIMA(p, d, q) by conditional Gaussian maximum likelihood.

The differenced series ``w`` is modelled as

    (w_t - mu) - sum_i phi_i (w_{t-i} - mu) = e_t + sum_j theta_j e_{t-j}

conditioning on the first ``n_cond`` values (with ``e_t = 0`` before that).
The concentrated negative log-likelihood and its analytic gradient are
computed with linear filters; L-BFGS does the optimisation from a
Hannan-Rissanen start. AR and MA roots that end up inside the unit circle
are reflected outside and the fit is refined once more.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.signal import lfilter

from .._validation import as_series, check_horizon
from ..exceptions import NonConvergence, SeriesTooShort
from .base import BaseForecaster, Forecast

logger = logging.getLogger(__name__)

MAX_P = 5
MAX_Q = 5
MAX_D = 2
_BAD = 1e20
# candidates with a root this close to the unit circle are not admissible in
# order selection (near-cancelling or near-unit-root fits)
MIN_ROOT_MODULUS = 1.0 - 1e-6


@dataclass(frozen=True)
class ArimaSpec:
    p: int
    d: int
    q: int

    def __post_init__(self):
        if min(self.p, self.d, self.q) < 0:
            raise ValueError(f"ARIMA orders must be non-negative, got {self.as_tuple()}")

    def as_tuple(self):
        return (self.p, self.d, self.q)

    def __str__(self):
        return f"ARIMA({self.p},{self.d},{self.q})"


@dataclass(frozen=True)
class ArimaFit:
    spec: ArimaSpec
    ar_coeffs: tuple
    ma_coeffs: tuple
    intercept: float
    innovation_variance: float
    loglik: float
    n_obs: int
    w_tail: tuple
    e_tail: tuple
    level_tail: tuple
    converged: bool = True

    @property
    def n_params(self):
        return self.spec.p + self.spec.q + (1 if self.spec.d == 0 else 0) + 1

    @property
    def aicc(self):
        k, n = self.n_params, self.n_obs
        if n - k - 1 <= 0:
            return math.inf
        return -2.0 * self.loglik + 2.0 * k + 2.0 * k * (k + 1) / (n - k - 1)


def difference(x, d):
    """``d``-fold differenced series and the last level of each intermediate
    series (needed to integrate forecasts back)."""
    w = np.asarray(x, dtype=float)
    tail = []
    for _ in range(d):
        tail.append(w[-1])
        w = np.diff(w)
    return w, tuple(tail)


def integrate_forecast(w_hat, level_tail):
    """Undo ``len(level_tail)`` differences, starting from the stored levels."""
    out = np.asarray(w_hat, dtype=float)
    for last in reversed(level_tail):
        out = last + np.cumsum(out)
    return out


def _unpack(params, p, q, with_mean):
    phi = params[:p]
    theta = params[p:p + q]
    mu = params[p + q] if with_mean else 0.0
    return phi, theta, mu


def _residuals(phi, theta, mu, w, n_cond):
    p = phi.size
    z = w - mu
    u = z[n_cond:].copy()
    for i in range(1, p + 1):
        u -= phi[i - 1] * z[n_cond - i:z.size - i]
    a = np.concatenate(([1.0], theta))
    e_tail = lfilter([1.0], a, u) if theta.size else u
    return e_tail, z


def arima_objective(params, w, p, q, with_mean, n_cond):
    """Concentrated negative conditional log-likelihood (up to a constant)
    and its gradient with respect to ``(phi, theta, mu)``."""
    phi, theta, mu = _unpack(np.asarray(params, dtype=float), p, q, with_mean)
    n_eff = w.size - n_cond
    with np.errstate(over="ignore", invalid="ignore"):
        e, z = _residuals(phi, theta, mu, w, n_cond)
        sse = float(e @ e)
        if not np.isfinite(sse) or sse <= 0:
            return (_BAD if not np.isfinite(sse) else 0.0), np.zeros(len(params))
        a = np.concatenate(([1.0], theta))
        grad = np.empty(len(params))
        for i in range(1, p + 1):
            v = -z[n_cond - i:z.size - i]
            grad[i - 1] = e @ lfilter([1.0], a, v)
        e_full = np.concatenate((np.zeros(q), e))
        for j in range(1, q + 1):
            v = -e_full[q - j:q - j + n_eff]
            grad[p + j - 1] = e @ lfilter([1.0], a, v)
        if with_mean:
            v = np.full(n_eff, -(1.0 - phi.sum()))
            grad[p + q] = e @ lfilter([1.0], a, v)
    f = 0.5 * n_eff * math.log(sse / n_eff)
    grad *= n_eff / sse
    if not np.all(np.isfinite(grad)):
        return _BAD, np.zeros(len(params))
    return f, grad


def _reflect(coeffs, sign):
    """Reflect roots of ``1 + sign * sum c_k z^k`` lying inside the unit
    circle to the outside. ``sign=-1`` for AR, ``+1`` for MA polynomials."""
    c = np.asarray(coeffs, dtype=float)
    if c.size == 0:
        return c, False
    poly = np.concatenate(([1.0], sign * c))  # ascending powers
    roots = np.roots(poly[::-1])
    inside = np.abs(roots) < 1.0
    if not inside.any():
        return c, False
    roots = np.where(inside, 1.0 / np.conj(roots), roots)
    new = np.poly(roots)[::-1].real  # ascending, leading term scaled by prod(-r)
    new = new / new[0]
    return sign * new[1:], True


def ar_roots(coeffs):
    c = np.asarray(coeffs, dtype=float)
    if c.size == 0:
        return np.empty(0)
    return np.roots(np.concatenate(([1.0], -c))[::-1])


def min_root_modulus(fit):
    """Smallest modulus over the AR and MA polynomial roots (inf if none)."""
    roots = list(ar_roots(fit.ar_coeffs))
    if fit.ma_coeffs:
        roots += list(np.roots(np.concatenate(([1.0], fit.ma_coeffs))[::-1]))
    return float(min(np.abs(roots))) if roots else math.inf


def _hannan_rissanen(w, p, q, with_mean):
    mu = float(w.mean()) if with_mean else 0.0
    z = w - mu
    params = np.zeros(p + q + (1 if with_mean else 0))
    if with_mean:
        params[-1] = mu
    if p + q == 0:
        return params
    n = z.size
    e = np.zeros(n)
    if q > 0:
        m = min(max(p + q + 2, int(round(math.log(n) ** 2))), n // 4)
        X = np.column_stack([z[m - i:n - i] for i in range(1, m + 1)])
        beta, *_ = np.linalg.lstsq(X, z[m:], rcond=None)
        e[m:] = z[m:] - X @ beta
        start = m + q
    else:
        start = p
    start = max(start, p)
    cols = [z[start - i:n - i] for i in range(1, p + 1)]
    cols += [e[start - j:n - j] for j in range(1, q + 1)]
    X = np.column_stack(cols)
    beta, *_ = np.linalg.lstsq(X, z[start:], rcond=None)
    params[:p + q] = beta
    params[:p], _ = _reflect(params[:p], -1)
    params[p:p + q], _ = _reflect(params[p:p + q], 1)
    return params


def _optimise(w, p, q, with_mean, n_cond, start):
    res = optimize.minimize(arima_objective, start, args=(w, p, q, with_mean, n_cond),
                            jac=True, method="L-BFGS-B",
                            options={"maxiter": 200, "gtol": 1e-7, "ftol": 1e-10})
    return res


def fit_arima(series, spec, n_cond=None):
    """Fit ``spec`` to ``series`` and return an :class:`ArimaFit`.

    ``n_cond`` (default ``p``) is the number of differenced values
    conditioned on; order selection fixes it so likelihoods are comparable.
    """
    x = as_series(series)
    p, d, q = spec.as_tuple()
    if x.size <= p + d + q + 10:
        raise SeriesTooShort(f"{spec} needs more than {p + d + q + 10} points, got {x.size}")
    w, level_tail = difference(x, d)
    with_mean = d == 0
    n_cond = p if n_cond is None else max(int(n_cond), p)
    n_eff = w.size - n_cond

    converged = True
    if p + q == 0:
        mu = float(w.mean()) if with_mean else 0.0
        params = np.array([mu]) if with_mean else np.empty(0)
    else:
        start = _hannan_rissanen(w, p, q, with_mean)
        f0, _ = arima_objective(start, w, p, q, with_mean, n_cond)
        if f0 >= _BAD:
            start = np.zeros_like(start)
            if with_mean:
                start[-1] = w.mean()
        res = _optimise(w, p, q, with_mean, n_cond, start)
        params = res.x
        phi, c1 = _reflect(params[:p], -1)
        theta, c2 = _reflect(params[p:p + q], 1)
        if c1 or c2:
            params = np.concatenate((phi, theta, params[p + q:]))
            res = _optimise(w, p, q, with_mean, n_cond, params)
            params = res.x
            phi, _ = _reflect(params[:p], -1)
            theta, _ = _reflect(params[p:p + q], 1)
            params = np.concatenate((phi, theta, params[p + q:]))
        converged = bool(res.success)
        if not converged:
            logger.debug("%s: optimiser stopped early (%s)", spec, res.message)

    phi, theta, mu = _unpack(params, p, q, with_mean)
    e, _ = _residuals(phi, theta, mu, w, n_cond)
    sse = float(e @ e)
    if not np.isfinite(sse):
        raise NonConvergence(f"{spec}: likelihood is not finite at the optimum")
    sigma2 = sse / n_eff
    if sigma2 > 0:
        loglik = -0.5 * n_eff * (math.log(2 * math.pi * sigma2) + 1.0)
    else:
        loglik = math.inf
    return ArimaFit(spec=spec, ar_coeffs=tuple(float(v) for v in phi),
                    ma_coeffs=tuple(float(v) for v in theta), intercept=float(mu),
                    innovation_variance=float(sigma2), loglik=float(loglik), n_obs=int(n_eff),
                    w_tail=tuple(float(v) for v in w[w.size - p:]) if p else (),
                    e_tail=tuple(float(v) for v in e[e.size - q:]) if q else (),
                    level_tail=tuple(float(v) for v in level_tail), converged=converged)


def _arma_step(phi, theta, mu, w_hist, e_hist):
    """Conditional expectation of the next ``w`` given recent values (most
    recent last) and recent innovations."""
    p, q = len(phi), len(theta)
    val = mu
    for i in range(1, p + 1):
        val += phi[i - 1] * (w_hist[-i] - mu)
    for j in range(1, q + 1):
        val += theta[j - 1] * e_hist[-j]
    return val


def forecast_arima(fit, horizon):
    """Iterated conditional-expectation forecasts, integrated back to levels."""
    horizon = check_horizon(horizon)
    phi, theta, mu = fit.ar_coeffs, fit.ma_coeffs, fit.intercept
    w_hist = list(fit.w_tail)
    e_hist = list(fit.e_tail)
    w_hat = np.empty(horizon)
    for h in range(horizon):
        w_hat[h] = _arma_step(phi, theta, mu, w_hist, e_hist)
        w_hist.append(w_hat[h])
        e_hist.append(0.0)
    return Forecast(integrate_forecast(w_hat, fit.level_tail), horizon)


def select_d(x, max_d=MAX_D):
    """Keep differencing while it lowers the sample variance."""
    w = np.asarray(x, dtype=float)
    d = 0
    var = w.var()
    while d < max_d:
        nxt = np.diff(w)
        if nxt.var() >= var:
            break
        w, var, d = nxt, nxt.var(), d + 1
    return d


def auto_arima_order(series, max_p=MAX_P, max_q=MAX_Q, max_d=MAX_D):
    """Order by AICc grid search over ``p <= max_p``, ``q <= max_q`` after
    choosing ``d`` by successive differencing. Ties go to smaller ``p + q``,
    then smaller ``p``. Fits left with an AR or MA root inside the unit
    circle are skipped."""
    x = as_series(series)
    if x.size < 50:
        raise SeriesTooShort(f"order selection needs at least 50 points, got {x.size}")
    d = select_d(x, max_d)
    best_key, best = None, None
    for p in range(max_p + 1):
        for q in range(max_q + 1):
            spec = ArimaSpec(p, d, q)
            try:
                fit = fit_arima(x, spec, n_cond=max_p)
            except (NonConvergence, SeriesTooShort):
                continue
            if min_root_modulus(fit) < MIN_ROOT_MODULUS:
                continue
            key = (round(fit.aicc, 9), p + q, p)
            if best_key is None or key < best_key:
                best_key, best = key, spec
    if best is None:
        raise NonConvergence("no candidate ARIMA order could be fitted")
    return best


class ArimaForecaster(BaseForecaster):
    """ARIMA forecaster.

    Parameters
    ----------
    order : tuple (p, d, q) or None
        ``None`` selects the order with :func:`auto_arima_order` at fit time.
    max_p, max_q, max_d : int
        Search bounds for automatic order selection.
    """

    min_length = 12

    def __init__(self, order=None, max_p=MAX_P, max_q=MAX_Q, max_d=MAX_D):
        self.order = order
        self.max_p = max_p
        self.max_q = max_q
        self.max_d = max_d

    def _fit(self, x):
        if self.order is None:
            spec = auto_arima_order(x, self.max_p, self.max_q, self.max_d)
        else:
            spec = ArimaSpec(*self.order)
        self.spec_ = spec
        self.fit_ = fit_arima(x, spec)

    def _predict_next(self, history):
        fit = self.fit_
        p, d, q = fit.spec.as_tuple()
        w, level_tail = difference(history, d)
        phi = np.asarray(fit.ar_coeffs)
        theta = np.asarray(fit.ma_coeffs)
        if q:
            e, _ = _residuals(phi, theta, fit.intercept, w, p)
        else:
            e = ()
        w_next = _arma_step(fit.ar_coeffs, fit.ma_coeffs, fit.intercept, w, e)
        return w_next + sum(level_tail)

    def predict(self, horizon):
        if not hasattr(self, "fit_"):
            return super().predict(horizon)
        return forecast_arima(self.fit_, horizon).values
