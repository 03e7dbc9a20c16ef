"""Empirical mode decomposition, its noise-assisted ensemble variant, and
fine-to-coarse regrouping of the resulting modes."""

import logging
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from scipy import stats
from scipy.linalg import solve_banded
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .._rng import derive_rng
from .._validation import as_series
from ..exceptions import NoImfs, SeriesTooShort, TooFewExtrema

logger = logging.getLogger(__name__)

MIN_LENGTH = 8
ENVELOPE_TOLERANCE = 0.05
MAX_IMFS = 40


@dataclass(frozen=True)
class EemdConfig:
    ensemble_size: int = 100
    noise_amplitude: float = 0.2
    max_sifts: int = 200
    sift_sd_threshold: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.ensemble_size < 1:
            raise ValueError("ensemble_size must be >= 1")
        if self.noise_amplitude < 0:
            raise ValueError("noise_amplitude must be >= 0")
        if self.max_sifts < 1:
            raise ValueError("max_sifts must be >= 1")


@dataclass(frozen=True)
class ImfSet:
    """Modes ordered fastest first, plus the final residual.

    ``forced`` counts modes accepted only because the sift cap was reached.
    """

    imfs: np.ndarray
    residual: np.ndarray
    forced: int = 0
    sift_counts: tuple = field(default=())

    @property
    def m(self):
        return self.imfs.shape[0]

    def reconstruct(self):
        return self.imfs.sum(axis=0) + self.residual


@dataclass(frozen=True)
class FineToCoarseSplit:
    high_freq: np.ndarray
    low_freq: np.ndarray
    trend: np.ndarray
    split_index: int
    p_values: tuple = field(default=())

    def components(self):
        return {"high": self.high_freq, "low": self.low_freq, "trend": self.trend}


@dataclass(frozen=True)
class Extrema:
    min_idx: np.ndarray
    min_val: np.ndarray
    max_idx: np.ndarray
    max_val: np.ndarray

    @property
    def count(self):
        return self.min_idx.size + self.max_idx.size


def find_extrema(y):
    """Strict local minima and maxima; a flat plateau counts once, at its
    midpoint rounded down. End points are never extrema."""
    x = np.asarray(y, dtype=float)
    if x.size < 3:
        raise SeriesTooShort("need at least 3 points to look for extrema")
    # collapse runs of equal values
    change = np.flatnonzero(np.diff(x) != 0) + 1
    run_start = np.concatenate(([0], change))
    run_end = np.concatenate((change - 1, [x.size - 1]))
    run_val = x[run_start]
    if run_val.size < 3:
        empty = np.empty(0, dtype=int)
        return Extrema(empty, np.empty(0), empty, np.empty(0))
    mid = run_val[1:-1]
    left, right = run_val[:-2], run_val[2:]
    pos = (run_start[1:-1] + run_end[1:-1]) // 2
    is_max = (mid > left) & (mid > right)
    is_min = (mid < left) & (mid < right)
    max_idx, min_idx = pos[is_max], pos[is_min]
    return Extrema(min_idx, x[min_idx], max_idx, x[max_idx])


NBSYM = 2


def _boundary_knots(x, ext, nbsym=NBSYM):
    """Envelope knots extended past both ends by mirroring ``nbsym``
    extrema.

    At each end the axis of symmetry is the outermost extremum, or the end
    sample itself when the end value lies beyond that extremum's opposite
    neighbour (the end sample then becomes a knot of the other envelope).
    Returns ``(min_t, min_v, max_t, max_v)``.
    """
    imin, imax = ext.min_idx, ext.max_idx
    n = x.size
    last = n - 1

    def left(use_min_axis):
        # flipped lists of the nbsym extrema nearest the start
        if imax[0] < imin[0]:
            if x[0] > x[imin[0]] and use_min_axis is None:
                lmax, lmin, sym = imax[1:nbsym + 1][::-1], imin[:nbsym][::-1], imax[0]
            else:
                lmax = imax[:nbsym][::-1]
                lmin = np.r_[imin[:nbsym - 1][::-1], 0]
                sym = 0
        else:
            if x[0] < x[imax[0]] and use_min_axis is None:
                lmax, lmin, sym = imax[:nbsym][::-1], imin[1:nbsym + 1][::-1], imin[0]
            else:
                lmax = np.r_[imax[:nbsym - 1][::-1], 0]
                lmin = imin[:nbsym][::-1]
                sym = 0
        return lmin, lmax, sym

    def right(use_end_axis):
        if imax[-1] < imin[-1]:
            if x[-1] < x[imax[-1]] and use_end_axis is None:
                rmax, rmin, sym = imax[-nbsym:][::-1], imin[-nbsym - 1:-1][::-1], imin[-1]
            else:
                rmax = np.r_[last, imax[-(nbsym - 1):][::-1]] if nbsym > 1 else np.array([last])
                rmin = imin[-nbsym:][::-1]
                sym = last
        else:
            if x[-1] > x[imin[-1]] and use_end_axis is None:
                rmax, rmin, sym = imax[-nbsym - 1:-1][::-1], imin[-nbsym:][::-1], imax[-1]
            else:
                rmax = imax[-nbsym:][::-1]
                rmin = np.r_[last, imin[-(nbsym - 1):][::-1]] if nbsym > 1 else np.array([last])
                sym = last
        return rmin, rmax, sym

    lmin, lmax, lsym = left(None)
    tlmin, tlmax = 2 * lsym - lmin, 2 * lsym - lmax
    if tlmin.size == 0 or tlmax.size == 0 or tlmin[0] > 0 or tlmax[0] > 0:
        # mirrored points do not reach past the start: use the start as axis
        if lsym == (imax[0] if imax[0] < imin[0] else imin[0]) and lsym != 0:
            lmax, lmin = imax[:nbsym][::-1], imin[:nbsym][::-1]
            lsym = 0
            tlmin, tlmax = -lmin, -lmax
    rmin, rmax, rsym = right(None)
    trmin, trmax = 2 * rsym - rmin, 2 * rsym - rmax
    if trmin.size == 0 or trmax.size == 0 or trmin[-1] < last or trmax[-1] < last:
        if rsym != last:
            rmax, rmin = imax[-nbsym:][::-1], imin[-nbsym:][::-1]
            rsym = last
            trmin, trmax = 2 * rsym - rmin, 2 * rsym - rmax

    min_t = np.concatenate((tlmin, imin, trmin)).astype(float)
    max_t = np.concatenate((tlmax, imax, trmax)).astype(float)
    min_v = np.concatenate((x[lmin], x[imin], x[rmin]))
    max_v = np.concatenate((x[lmax], x[imax], x[rmax]))
    return min_t, min_v, max_t, max_v


def natural_spline(knots, values, t):
    """Natural cubic spline through ``(knots, values)`` evaluated at ``t``.

    ``knots`` must be strictly increasing; points outside the knot range are
    extrapolated with the end cubic pieces.
    """
    xk = np.asarray(knots, dtype=float)
    yk = np.asarray(values, dtype=float)
    h = np.diff(xk)
    slope = np.diff(yk) / h
    n = xk.size
    m = np.zeros(n)  # second derivatives; zero at both ends
    if n > 2:
        ab = np.zeros((3, n - 2))
        ab[0, 1:] = h[1:-1]
        ab[1] = 2.0 * (h[:-1] + h[1:])
        ab[2, :-1] = h[1:-1]
        m[1:-1] = solve_banded((1, 1), ab, 6.0 * np.diff(slope))
    i = np.clip(np.searchsorted(xk, t, side="right") - 1, 0, n - 2)
    hi = h[i]
    a = xk[i + 1] - t
    b = t - xk[i]
    return ((m[i] * a ** 3 + m[i + 1] * b ** 3) / (6.0 * hi)
            + (yk[i] / hi - m[i] * hi / 6.0) * a
            + (yk[i + 1] / hi - m[i + 1] * hi / 6.0) * b)


def build_envelopes(y, extrema=None):
    """Lower and upper natural-cubic-spline envelopes sampled at every index."""
    x = np.asarray(y, dtype=float)
    ext = find_extrema(x) if extrema is None else extrema
    if ext.max_idx.size < 2 or ext.min_idx.size < 2:
        raise TooFewExtrema(
            f"{ext.max_idx.size} maxima and {ext.min_idx.size} minima; need 2 of each")
    t = np.arange(x.size, dtype=float)
    lo_t, lo_v, hi_t, hi_v = _boundary_knots(x, ext)
    lower = natural_spline(lo_t, lo_v, t)
    upper = natural_spline(hi_t, hi_v, t)
    return lower, upper


def zero_crossings(y):
    s = np.sign(np.asarray(y, dtype=float))
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _is_imf(x, ext, mean_env):
    if abs(ext.count - zero_crossings(x)) > 1:
        return False
    return float(np.max(np.abs(mean_env))) <= ENVELOPE_TOLERANCE * float(np.std(x))


def imf_check(component):
    """True when extrema and zero crossings differ by at most one and the
    envelope mean stays within 5% of the component's standard deviation."""
    x = np.asarray(component, dtype=float)
    if x.size < 3:
        raise SeriesTooShort("need at least 3 points")
    ext = find_extrema(x)
    try:
        lower, upper = build_envelopes(x, ext)
    except TooFewExtrema:
        return False
    return _is_imf(x, ext, 0.5 * (lower + upper))


def _is_exhausted(ext):
    return ext.max_idx.size < 2 or ext.min_idx.size < 2


def _sift(r, max_sifts, sd_threshold):
    """Extract one mode from ``r``.

    Sifting stops once the candidate satisfies both mode conditions. With
    ``sd_threshold`` set, it also stops when the relative change between
    successive candidates falls below it. Returns ``(mode, n_sifts, forced)``,
    or ``None`` if ``r`` runs out of extrema part-way through.
    """
    h = r
    for k in range(max_sifts + 1):
        ext = find_extrema(h)
        if _is_exhausted(ext):
            return None
        lower, upper = build_envelopes(h, ext)
        mean_env = 0.5 * (lower + upper)
        if _is_imf(h, ext, mean_env):
            return h, k, False
        if k == max_sifts:
            break
        if sd_threshold is not None:
            sd = float(np.sum(mean_env ** 2) / max(float(np.sum(h ** 2)), 1e-300))
            if sd < sd_threshold:
                return h - mean_env, k + 1, False
        h = h - mean_env
    return h, max_sifts, True


def emd(y, config=None):
    """Plain EMD: repeatedly sift modes out until the residual is monotone
    or has fewer than two maxima or minima."""
    cfg = config or EemdConfig()
    x = as_series(y, min_length=MIN_LENGTH)
    r = x.copy()
    imfs, counts = [], []
    forced = 0
    while len(imfs) < MAX_IMFS:
        if _is_exhausted(find_extrema(r)):
            break
        out = _sift(r, cfg.max_sifts, cfg.sift_sd_threshold)
        if out is None:
            break
        mode, n_sifts, was_forced = out
        imfs.append(mode)
        counts.append(n_sifts)
        forced += was_forced
        r = r - mode
    residual = x - np.sum(imfs, axis=0) if imfs else x.copy()
    stacked = np.array(imfs) if imfs else np.empty((0, x.size))
    if forced:
        logger.debug("%d mode(s) hit the sift cap of %d", forced, cfg.max_sifts)
    return ImfSet(imfs=stacked, residual=residual, forced=forced, sift_counts=tuple(counts))


def _ensemble_member(x, sigma, cfg, run):
    rng = derive_rng(cfg.seed, "eemd", run)
    noisy = x + rng.normal(0.0, sigma, size=x.size) if sigma > 0 else x
    res = emd(noisy, cfg)
    return res.imfs, res.residual


def eemd(y, config=None, n_jobs=None):
    """Ensemble EMD: mean modes over ``ensemble_size`` noise-perturbed copies.

    Member ``k`` draws its noise from the stream ``(seed, "eemd", k)``, and
    members are summed in index order, so the result does not depend on
    ``n_jobs``.
    """
    cfg = config or EemdConfig()
    x = as_series(y, min_length=MIN_LENGTH)
    sigma = cfg.noise_amplitude * float(np.std(x))
    if sigma == 0:
        # every member would be identical
        res = emd(x, cfg)
        return ImfSet(imfs=res.imfs, residual=res.residual)
    if n_jobs in (None, 1):
        members = [_ensemble_member(x, sigma, cfg, k) for k in range(cfg.ensemble_size)]
    else:
        members = Parallel(n_jobs=n_jobs)(
            delayed(_ensemble_member)(x, sigma, cfg, k) for k in range(cfg.ensemble_size))

    m = max(imfs.shape[0] for imfs, _ in members)
    total = np.zeros((m, x.size))
    resid = np.zeros(x.size)
    for imfs, r in members:
        total[:imfs.shape[0]] += imfs
        resid += r
    M = cfg.ensemble_size
    return ImfSet(imfs=total / M, residual=resid / M)


def fine_to_coarse(imfs, alpha=0.05):
    """Regroup modes into high-frequency, low-frequency and trend parts.

    The partial sums ``S_n = IMF_1 + ... + IMF_n`` are tested in turn with a
    one-sample t-test against zero mean. The first significant ``n`` puts
    modes ``1..n-1`` in the high-frequency part and the rest in the
    low-frequency part; the residual is the trend.
    """
    C = np.asarray(imfs.imfs, dtype=float)
    if C.ndim != 2 or C.shape[0] == 0:
        raise NoImfs("fine-to-coarse regrouping needs at least one mode")
    m, n = C.shape
    partial = np.cumsum(C, axis=0)
    p_values = []
    split = None
    for i in range(m):
        s = partial[i]
        if np.ptp(s) == 0:
            p = 0.0 if s[0] != 0 else 1.0
        else:
            p = float(stats.ttest_1samp(s, 0.0).pvalue)
        p_values.append(p)
        if split is None and p < alpha:
            split = i + 1
            break
    if split is None:
        high, low = partial[-1].copy(), np.zeros(n)
        split = m + 1
    else:
        high = partial[split - 2].copy() if split > 1 else np.zeros(n)
        low = C[split - 1:].sum(axis=0)
    return FineToCoarseSplit(high_freq=high, low_freq=low, trend=np.array(imfs.residual, dtype=float),
                             split_index=split, p_values=tuple(p_values))


class EEMDDecomposer(TransformerMixin, BaseEstimator):
    """EEMD followed by fine-to-coarse regrouping.

    ``transform`` returns an ``(n, 3)`` array of high-frequency,
    low-frequency and trend components. Set ``ensemble_size=1`` and
    ``noise_amplitude=0`` for plain EMD.
    """

    component_names = ("high", "low", "trend")

    def __init__(self, ensemble_size=100, noise_amplitude=0.2, max_sifts=200,
                 sift_sd_threshold=None, seed=0, alpha=0.05, n_jobs=None):
        self.ensemble_size = ensemble_size
        self.noise_amplitude = noise_amplitude
        self.max_sifts = max_sifts
        self.sift_sd_threshold = sift_sd_threshold
        self.seed = seed
        self.alpha = alpha
        self.n_jobs = n_jobs

    def _config(self):
        return EemdConfig(ensemble_size=self.ensemble_size, noise_amplitude=self.noise_amplitude,
                          max_sifts=self.max_sifts, sift_sd_threshold=self.sift_sd_threshold,
                          seed=self.seed)

    def _decompose(self, y):
        imfs = eemd(y, self._config(), n_jobs=self.n_jobs)
        if imfs.m == 0:
            n = imfs.residual.size
            split = FineToCoarseSplit(np.zeros(n), np.zeros(n), imfs.residual.copy(), 1)
        else:
            split = fine_to_coarse(imfs, alpha=self.alpha)
        return imfs, split

    def fit(self, y, X=None):
        self.imfs_, self.split_ = self._decompose(as_series(y))
        return self

    def transform(self, y):
        check_is_fitted(self, "split_")
        _, split = self._decompose(as_series(y))
        return np.column_stack([split.high_freq, split.low_freq, split.trend])

    def fit_transform(self, y, X=None):
        self.fit(y)
        s = self.split_
        return np.column_stack([s.high_freq, s.low_freq, s.trend])

    def inverse_transform(self, components):
        return np.asarray(components).sum(axis=1)
