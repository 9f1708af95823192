"""Controlled signal degradations for quality-ordering experiments.

Every degradation is a pure function of (clip, spec): noise draws come
from a counter-based generator keyed by DegradationSpec.seed, so the
same call always produces the same samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import butter, filtfilt, lfilter

from ._rng import gaussian_white, philox_generator
from .audio_io import AudioClip
from .exceptions import CutoffOutOfRange, ZeroPowerSignal

ADDITIVE_NOISE = "additive_noise"
PEAK_CLIP = "peak_clip"
LOWPASS = "lowpass"
KINDS = (ADDITIVE_NOISE, PEAK_CLIP, LOWPASS)

NOISE_KINDS = ("white", "pink")

# one-pole sections approximating a -3 dB/octave slope (Kellet's economy
# pink filter): pink = sum of lfilter([g], [1, -p], white) + direct term
_PINK_SECTIONS = (
    (0.0990460, 0.99765),
    (0.2965164, 0.96300),
    (1.0526913, 0.57000),
)
_PINK_DIRECT = 0.1848


@dataclass(frozen=True)
class DegradationSpec:
    """One degradation to apply: the kind plus its parameters."""

    kind: str
    snr_db: float = math.inf
    noise_kind: str = "white"
    threshold: float = 1.0
    cutoff: float = 1000.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.noise_kind not in NOISE_KINDS:
            raise ValueError(
                f"noise_kind must be one of {NOISE_KINDS}, got {self.noise_kind!r}"
            )
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError(f"threshold must lie in (0, 1], got {self.threshold}")

    def describe(self) -> str:
        if self.kind == ADDITIVE_NOISE:
            return f"{ADDITIVE_NOISE} noise_kind={self.noise_kind} snr_db={self.snr_db} seed={self.seed}"
        if self.kind == PEAK_CLIP:
            return f"{PEAK_CLIP} threshold={self.threshold}"
        return f"{LOWPASS} cutoff={self.cutoff}"


@dataclass(frozen=True)
class DegradationOutcome:
    """Degraded clip plus what actually happened while making it."""

    clip: AudioClip
    spec: DegradationSpec
    peak_scale: float = 1.0
    realized_snr_db: float | None = None


def seeded_noise(n: int, noise_kind: str, seed: int) -> np.ndarray:
    """n unit-less noise samples, reproducible from the seed alone."""
    white = gaussian_white(n, philox_generator(seed))
    if noise_kind == "white":
        return white
    if noise_kind != "pink":
        raise ValueError(f"noise_kind must be one of {NOISE_KINDS}, got {noise_kind!r}")
    pink = _PINK_DIRECT * white
    for gain, pole in _PINK_SECTIONS:
        pink = pink + lfilter([gain], [1.0, -pole], white)
    return pink


def _signal_power(samples: np.ndarray) -> float:
    return float(np.mean(np.square(samples, dtype=np.float64)))


def _add_noise(clip: AudioClip, spec: DegradationSpec) -> DegradationOutcome:
    if math.isinf(spec.snr_db) and spec.snr_db > 0:
        return DegradationOutcome(clip=clip, spec=spec, realized_snr_db=math.inf)
    signal_power = _signal_power(clip.samples)
    if signal_power == 0.0:
        raise ZeroPowerSignal("cannot set an SNR against a silent signal")

    noise = seeded_noise(len(clip), spec.noise_kind, spec.seed)
    noise_power = _signal_power(noise)
    scale = math.sqrt(signal_power / (noise_power * 10.0 ** (spec.snr_db / 10.0)))
    scaled = scale * noise
    realized = 10.0 * math.log10(signal_power / _signal_power(scaled))

    mixed = clip.samples + scaled
    peak = float(np.max(np.abs(mixed)))
    peak_scale = 1.0
    if peak > 1.0:
        peak_scale = 1.0 / peak
        mixed = mixed * peak_scale
    return DegradationOutcome(
        clip=AudioClip(samples=mixed, sample_rate=clip.sample_rate),
        spec=spec,
        peak_scale=peak_scale,
        realized_snr_db=realized,
    )


def add_noise_snr(clip: AudioClip, spec: DegradationSpec) -> AudioClip:
    """Mix in seeded noise at an exact signal-to-noise ratio.

    The noise is scaled so 10 log10(P_signal / P_noise) equals
    ``spec.snr_db`` up to float rounding. An infinite snr_db is the
    no-noise sentinel and returns the input unchanged. If the mix leaves
    [-1, 1] it is peak-normalized; use :func:`apply_degradation` to see
    the applied scale.
    """
    outcome = _add_noise(clip, spec if spec.kind == ADDITIVE_NOISE
                         else replace(spec, kind=ADDITIVE_NOISE))
    return outcome.clip


def peak_clip(clip: AudioClip, threshold: float) -> AudioClip:
    """Clamp every sample to [-threshold, threshold]."""
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    return AudioClip(
        samples=np.clip(clip.samples, -threshold, threshold),
        sample_rate=clip.sample_rate,
    )


def lowpass(clip: AudioClip, cutoff: float) -> AudioClip:
    """Zero-phase second-order Butterworth lowpass with DC gain 1."""
    nyquist = clip.sample_rate / 2.0
    if not 0.0 < cutoff < nyquist:
        raise CutoffOutOfRange(
            f"cutoff {cutoff} Hz outside (0, {nyquist}) for rate {clip.sample_rate}"
        )
    b, a = butter(2, cutoff, fs=clip.sample_rate)
    filtered = filtfilt(b, a, clip.samples)
    return AudioClip(samples=filtered, sample_rate=clip.sample_rate)


def apply_degradation(clip: AudioClip, spec: DegradationSpec) -> DegradationOutcome:
    """Apply one spec and report side effects (peak scale, realized SNR)."""
    if spec.kind == ADDITIVE_NOISE:
        return _add_noise(clip, spec)
    if spec.kind == PEAK_CLIP:
        return DegradationOutcome(clip=peak_clip(clip, spec.threshold), spec=spec)
    return DegradationOutcome(clip=lowpass(clip, spec.cutoff), spec=spec)
