"""Input validation helpers shared across the package."""

import numpy as np

from .errors import DomainError


def as_float_array(values, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    return arr


def check_intensity_grid(intensities, name="intensity", allow_empty=False):
    """Validate a strictly increasing, strictly positive intensity axis."""
    arr = as_float_array(intensities, name)
    if arr.size == 0 and not allow_empty:
        raise DomainError(f"{name} grid is empty")
    if np.any(arr <= 0):
        raise DomainError(f"{name} values must be positive")
    if np.any(np.diff(arr) <= 0):
        raise DomainError(f"{name} values must be strictly increasing")
    return arr


def check_positive_scalar(value, name):
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise DomainError(f"{name} must be a positive finite number, got {value}")
    return value


def check_xi(xi):
    """Validate the intensity ratio xi = I/I0 in (0, 1]; scalar or array."""
    arr = np.asarray(xi, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0) or np.any(arr > 1):
        raise DomainError("xi = I/I0 must lie in (0, 1]")
    return arr


def curve_xy(X, y=None):
    """Accept (I0, S) arrays or an object with .intensities/.values."""
    if y is None:
        return check_intensity_grid(X.intensities), as_float_array(X.values, "signal")
    return check_intensity_grid(X), as_float_array(y, "signal")
