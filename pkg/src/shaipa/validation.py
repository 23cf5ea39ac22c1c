"""Input validation helpers shared by the estimator layer."""
from __future__ import annotations

import math
import numbers

import numpy as np

from .exceptions import ConfigError

__all__ = ["check_theta", "check_bounds", "check_horizon", "check_replications", "check_model"]


def check_theta(theta, n_theta=None, bounds=None):
    """Return ``theta`` as a finite 1-D float array, optionally size- and box-checked."""
    arr = np.atleast_1d(np.asarray(theta, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise ConfigError("theta must be a non-empty 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise ConfigError("theta must be finite")
    if n_theta is not None and arr.size != n_theta:
        raise ConfigError(f"theta must have {n_theta} entries, got {arr.size}")
    if bounds is not None:
        lo, hi = check_bounds(bounds, arr.size)
        if np.any(arr < lo) or np.any(arr > hi):
            raise ConfigError(f"theta {arr.tolist()} lies outside the box")
    return arr


def check_bounds(bounds, n):
    """Return ``(low, high)`` arrays for ``n`` coordinates."""
    b = np.asarray(bounds, dtype=float)
    if b.shape == (2,) and n == 1:
        b = b.reshape(1, 2)
    if b.shape != (n, 2):
        raise ConfigError(f"bounds must be {n} (low, high) pairs")
    if np.any(np.isnan(b)) or np.any(b[:, 0] > b[:, 1]):
        raise ConfigError("bounds need low <= high")
    return b[:, 0], b[:, 1]


def check_horizon(T):
    if isinstance(T, bool) or not isinstance(T, numbers.Real) or not math.isfinite(T) or T <= 0:
        raise ConfigError(f"horizon must be positive and finite, got {T!r}")
    return float(T)


def check_replications(X):
    """Replication indices from ``None``, an int count, or an array of shape (n,) or (n, 1)."""
    if X is None:
        raise ConfigError("replications are required")
    if isinstance(X, numbers.Integral) and not isinstance(X, bool):
        if X < 1:
            raise ConfigError("replication count must be >= 1")
        return np.arange(int(X))
    arr = np.asarray(X)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1 or arr.size == 0:
        raise ConfigError("replications must be a non-empty 1-D array of indices")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise ConfigError("replication indices must be integers")
        arr = arr.astype(np.int64)
    if np.any(arr < 0):
        raise ConfigError("replication indices must be non-negative")
    return arr


def check_model(model):
    """Resolve a catalog name (or pass through an AutomatonModel)."""
    from .catalog import build_model
    from .model import AutomatonModel

    if isinstance(model, AutomatonModel):
        return model
    if isinstance(model, str):
        return build_model(model)
    raise ConfigError(f"model must be a catalog name or an AutomatonModel, got {type(model).__name__}")
