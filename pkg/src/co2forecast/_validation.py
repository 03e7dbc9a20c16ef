"""Input validation helpers shared by the estimators."""

import numbers

import numpy as np

from .exceptions import OutOfRange, SeriesTooShort


def as_series(y, *, min_length=1, name="y"):
    """Return ``y`` as a finite 1-D float array.

    Accepts lists, arrays, pandas objects and :class:`HourlySeries`.
    """
    values = getattr(y, "values", y)
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_length:
        raise SeriesTooShort(f"{name} has {arr.size} values; at least {min_length} required")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite values; run fill_gaps first")
    return arr


def check_horizon(horizon):
    if not isinstance(horizon, numbers.Integral) or isinstance(horizon, bool):
        raise TypeError(f"horizon must be an integer, got {horizon!r}")
    if horizon < 1:
        raise OutOfRange(f"horizon must be >= 1, got {horizon}")
    return int(horizon)


def check_int(value, name, minimum):
    if not isinstance(value, numbers.Integral) or isinstance(value, bool):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)
