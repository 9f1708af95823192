"""Per-frame dispersion primitives shared by quantization and metrics."""

from __future__ import annotations

import numpy as np

from .exceptions import DimensionTooSmall

VARIANCE = "variance"
POWER = "power"
MODES = (VARIANCE, POWER)


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"variance mode must be one of {MODES}, got {mode!r}")
    return mode


def frame_sigma_rows(frames: np.ndarray, mode: str) -> np.ndarray:
    """Per-frame sigma of a (T, D) matrix, returned as shape (T,).

    ``variance`` is the population variance across the D components;
    ``power`` is the mean of the squared components. Variance of a single
    component is identically zero, so that combination is rejected.
    """
    check_mode(mode)
    if mode == VARIANCE:
        if frames.shape[1] < 2:
            raise DimensionTooSmall(
                "variance mode needs at least 2 components per frame"
            )
        return frames.var(axis=1)
    return np.square(frames).mean(axis=1)


def mean_frame_sigma(frames: np.ndarray, mode: str) -> float:
    """Per-frame sigma averaged over frames (sigma first, then mean)."""
    return float(frame_sigma_rows(frames, mode).mean())
