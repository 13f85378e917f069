"""Small input-validation helpers used by the public estimator API."""

from __future__ import annotations

import numbers

import numpy as np


def check_sample(y, min_len=1):
    """Coerce ``y`` to a 1-d float array of finite observations."""
    arr = np.asarray(y, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:  # tolerate column vectors
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d sample, got shape {arr.shape}")
    if arr.size < min_len:
        raise ValueError(f"sample needs at least {min_len} observation(s), got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("sample contains non-finite values")
    return arr


def check_points(t):
    """Coerce evaluation points to a 1-d float array."""
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"expected scalar or 1-d evaluation points, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("evaluation points contain non-finite values")
    return arr


def check_positive(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_in_open_interval(value, name, lo, hi):
    if not isinstance(value, numbers.Real) or not (lo < value < hi):
        raise ValueError(f"{name} must lie in ({lo}, {hi}), got {value!r}")
    return float(value)


def check_fitted(estimator, attribute):
    if not hasattr(estimator, attribute):
        raise RuntimeError(
            f"{type(estimator).__name__} is not fitted yet; call fit() before predict()"
        )
