"""Input normalization helpers used at every public boundary.

Arrays are accepted as anything ``np.asarray`` understands and come back as
float64 ndarrays; every entry must be finite. These helpers raise from the
shared taxonomy in :mod:`oversmooth.errors` so the CLI can map failures to
exit codes without caring where they originated.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidParameter, ShapeMismatch


def as_matrix(obj, name: str = "matrix") -> np.ndarray:
    """Return ``obj`` as a 2-D float64 array with finite entries."""
    arr = np.asarray(obj, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeMismatch(f"{name} must be 2-D, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeMismatch(f"{name} must be nonempty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameter(f"{name} contains non-finite entries")
    return arr


def as_vector(obj, name: str = "vector") -> np.ndarray:
    """Return ``obj`` as a 1-D float64 array with finite entries."""
    arr = np.asarray(obj, dtype=np.float64)
    if arr.ndim != 1:
        raise ShapeMismatch(f"{name} must be 1-D, got ndim={arr.ndim}")
    if arr.shape[0] < 1:
        raise ShapeMismatch(f"{name} must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameter(f"{name} contains non-finite entries")
    return arr


def as_square_matrix(obj, name: str = "matrix") -> np.ndarray:
    arr = as_matrix(obj, name)
    if arr.shape[0] != arr.shape[1]:
        raise ShapeMismatch(f"{name} must be square, got shape {arr.shape}")
    return arr


def require_length(vec: np.ndarray, n: int, name: str = "vector") -> None:
    if vec.shape[0] != n:
        raise ShapeMismatch(f"{name} has length {vec.shape[0]}, expected {n}")


def require_positive_int(value, name: str) -> int:
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
        raise InvalidParameter(f"{name} must be an integer, got {value!r}")
    if value < 1:
        raise InvalidParameter(f"{name} must be >= 1, got {value}")
    return int(value)
