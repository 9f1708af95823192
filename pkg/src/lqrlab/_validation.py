"""Input validation helpers used across modules."""

from __future__ import annotations

import numpy as np

from .exceptions import DimensionMismatch, NonFiniteInput


def as_float_array(x, name: str = "array", ndim: int | None = None) -> np.ndarray:
    """Convert to a float64 ndarray, rejecting NaN/inf values."""
    arr = np.asarray(x, dtype=np.float64)
    if ndim is not None and arr.ndim != ndim:
        raise DimensionMismatch(f"{name} must be {ndim}-dimensional, got {arr.ndim}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise NonFiniteInput(f"{name} contains non-finite values")
    return arr


def check_matrix(x, name: str = "matrix") -> np.ndarray:
    """Validate a finite 2-D float matrix."""
    return as_float_array(x, name=name, ndim=2)


def check_same_dim(d_left: int, d_right: int, context: str) -> None:
    if d_left != d_right:
        raise DimensionMismatch(f"{context}: dimensions {d_left} and {d_right} differ")


def check_positive_int(value: int, name: str) -> int:
    value = int(value)
    if value <= 0:
        raise ValueError(f"{name} must be a positive integer, got {value}")
    return value
