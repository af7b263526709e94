"""Input validation helpers shared across the package."""

from __future__ import annotations

import warnings

import numpy as np


def as_points(X, dim: int | None = None) -> np.ndarray:
    """Coerce ``X`` to a float64 array of shape ``(n, d)``.

    1-D input is interpreted as ``n`` points in one dimension.  If ``dim``
    is given, the point dimension must match it.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X.reshape(-1, 1)
    elif X.ndim != 2:
        raise ValueError(f"points must be a 1-D or 2-D array, got ndim={X.ndim}")
    if not np.all(np.isfinite(X)):
        raise ValueError("points contain non-finite values")
    if dim is not None and X.shape[1] != dim:
        raise ValueError(f"points have dimension {X.shape[1]}, expected {dim}")
    return X


def check_positive(value: float, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be a positive finite number, got {value}")
    return value


def warn_on_duplicates(X: np.ndarray, context: str) -> None:
    """Emit a warning if any two rows of ``X`` coincide.

    Duplicates make a Gram matrix singular; downstream conditioning stays
    well posed because observation noise is always added to the diagonal.
    """
    n = X.shape[0]
    if n < 2:
        return
    order = np.lexsort(X.T[::-1])
    if np.any(np.all(X[order][1:] == X[order][:-1], axis=1)):
        warnings.warn(
            f"{context}: duplicate points detected; the Gram matrix is singular",
            stacklevel=3,
        )
