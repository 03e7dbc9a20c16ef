"""Pattern-sequence forecasting (PSF) and its differenced variant (DPSF).

The series is cut into day-long blocks (aligned so the last block ends at
the last training value), the blocks are clustered with k-means, and the
label sequence of the most recent ``window`` days is looked up in history.
The forecast for the next day is the mean of the blocks that followed every
match.
"""

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.cluster import KMeans
from sklearn.exceptions import ConvergenceWarning

from .._rng import derive_seed
from ..exceptions import DegenerateClustering, SeriesTooShort
from .base import BaseForecaster, Strategy, multi_step_forecast

logger = logging.getLogger(__name__)

BLOCK = 24


@dataclass(frozen=True)
class PsfSpec:
    window: int = 4
    clusters: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.clusters < 2:
            raise ValueError("clusters must be >= 2")


def match_pattern(labels, window):
    """Indices ``j`` whose successor block exists and whose ``window`` labels
    ending just before it equal the last ``window`` labels. The window is
    shrunk by one until something matches; with ``window`` 0 every block
    but the first qualifies."""
    labels = np.asarray(labels)
    n = labels.size
    for w in range(min(window, n - 1), 0, -1):
        query = labels[n - w:]
        hits = [j for j in range(w, n) if np.array_equal(labels[j - w:j], query)]
        if hits:
            return hits, w
    return list(range(1, n)), 0


class PSFForecaster(BaseForecaster):
    """Pattern-sequence forecaster on raw day-long blocks.

    Parameters
    ----------
    window : int
        Number of most recent day labels forming the query pattern.
    clusters : int
        k-means cluster count. Reduced (with a warning) when there are
        fewer distinct day shapes than clusters.
    seed : int
        Seeds k-means (25 restarts, best inertia kept).
    """

    block = BLOCK

    def __init__(self, window=4, clusters=3, seed=0, n_init=25):
        self.window = window
        self.clusters = clusters
        self.seed = seed
        self.n_init = n_init

    def _blocks(self, x, origin):
        n_blocks = (x.size - origin) // self.block
        return x[origin:origin + n_blocks * self.block].reshape(n_blocks, self.block)

    def _fit(self, x):
        PsfSpec(self.window, self.clusters, self.seed)
        if x.size < (self.window + 2) * self.block:
            raise SeriesTooShort(
                f"PSF with window {self.window} needs {(self.window + 2) * self.block} points, "
                f"got {x.size}")
        self.origin_ = x.size % self.block
        blocks = self._blocks(x, self.origin_)
        distinct = np.unique(blocks, axis=0).shape[0]
        k = min(self.clusters, distinct)
        if k < self.clusters:
            logger.warning("PSF: only %d distinct day shapes; using %d clusters", distinct, k)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            km = KMeans(n_clusters=k, n_init=self.n_init,
                        random_state=derive_seed(self.seed, "psf-kmeans"))
            labels = km.fit_predict(blocks)
        if np.unique(labels).size < k:
            raise DegenerateClustering(f"k-means left an empty cluster with k={k}")
        self.kmeans_ = km
        self.n_clusters_ = k

    def forecast_block(self, history):
        """Next day's values, given ``history`` cut into blocks from
        ``origin_``; trailing values of an incomplete day are ignored."""
        x = np.asarray(history, dtype=float)
        blocks = self._blocks(x, self.origin_)
        labels = self.kmeans_.predict(blocks)
        hits, used = match_pattern(labels, self.window)
        self.last_window_used_ = used
        return blocks[hits].mean(axis=0)

    def _predict_next(self, history):
        pos = (len(history) - self.origin_) % self.block
        return self.forecast_block(history)[pos]


class DPSFForecaster(BaseForecaster):
    """PSF on the first differences, integrated from the last level."""

    def __init__(self, window=5, clusters=3, seed=0, n_init=25):
        self.window = window
        self.clusters = clusters
        self.seed = seed
        self.n_init = n_init

    def _fit(self, x):
        self.psf_ = PSFForecaster(self.window, self.clusters, self.seed, self.n_init).fit(np.diff(x))

    def _predict_next(self, history):
        return history[-1] + self.psf_.predict_next(np.diff(history))


def fit_forecast_psf(series, spec, horizon, strategy=Strategy.RECURSIVE):
    model = PSFForecaster(spec.window, spec.clusters, spec.seed)
    return multi_step_forecast(model, series, horizon, strategy)


def forecast_dpsf(series, spec, horizon, strategy=Strategy.RECURSIVE):
    model = DPSFForecaster(spec.window, spec.clusters, spec.seed)
    return multi_step_forecast(model, series, horizon, strategy)
