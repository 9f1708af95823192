"""Correlation statistics and a trivial intrusive SNR baseline.

Pearson and Spearman are written out from their definitions rather than
delegated, so the exact tie policy (average ranks) and the clipping of
rounding excursions outside [-1, 1] are pinned here and covered by the
test suite's oracles.
"""

from __future__ import annotations

import math

import numpy as np

from ._validation import as_float_array
from .audio_io import AudioClip
from .exceptions import DegenerateVariance, LengthMismatch, TooFewPoints


def _paired(objective, subjective) -> tuple[np.ndarray, np.ndarray]:
    x = as_float_array(objective, "objective", ndim=1)
    y = as_float_array(subjective, "subjective", ndim=1)
    if x.shape[0] != y.shape[0]:
        raise LengthMismatch(f"paired scores differ in length: {x.shape[0]} vs {y.shape[0]}")
    if x.shape[0] < 3:
        raise TooFewPoints(f"need at least 3 pairs, got {x.shape[0]}")
    return x, y


def pearson(objective, subjective) -> float:
    """Sample Pearson correlation, clipped into [-1, 1]."""
    x, y = _paired(objective, subjective)
    xc = x - x.mean()
    yc = y - y.mean()
    ssx = float(np.dot(xc, xc))
    ssy = float(np.dot(yc, yc))
    if ssx == 0.0 or ssy == 0.0:
        raise DegenerateVariance("a constant sequence has no defined correlation")
    rho = float(np.dot(xc, yc)) / math.sqrt(ssx * ssy)
    return float(np.clip(rho, -1.0, 1.0))


def average_ranks(values) -> np.ndarray:
    """Ranks 1..n with ties assigned the mean of the positions they span."""
    x = as_float_array(values, "values", ndim=1)
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.shape[0])
    ordered = x[order]
    i = 0
    while i < x.shape[0]:
        j = i
        while j + 1 < x.shape[0] and ordered[j + 1] == ordered[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(objective, subjective) -> float:
    """Rank correlation: Pearson over average ranks."""
    x, y = _paired(objective, subjective)
    return pearson(average_ranks(x), average_ranks(y))


def snr_baseline(reference: AudioClip, degraded: AudioClip) -> float:
    """Intrusive SNR in dB: 10 log10(P_ref / P_(ref - deg)).

    Identical signals return the infinite-SNR sentinel math.inf; a silent
    reference against a nonsilent degraded signal returns -math.inf.
    """
    if len(reference) != len(degraded):
        raise LengthMismatch(
            f"reference has {len(reference)} samples, degraded has {len(degraded)}"
        )
    if reference.sample_rate != degraded.sample_rate:
        raise LengthMismatch(
            f"sample rates differ: {reference.sample_rate} vs {degraded.sample_rate}"
        )
    error = reference.samples - degraded.samples
    error_power = float(np.mean(np.square(error)))
    if error_power == 0.0:
        return math.inf
    ref_power = float(np.mean(np.square(reference.samples)))
    if ref_power == 0.0:
        return -math.inf
    return 10.0 * math.log10(ref_power / error_power)
