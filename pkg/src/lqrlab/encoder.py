"""Deterministic log-filterbank encoder mapping audio to latent frames.

Each frame is Hann-windowed, transformed with a real DFT, and its power
spectrum is aggregated into triangular mel-spaced bands spanning
[0, sample_rate / 2]. The latent entry for band b is
log(band_energy_b + log_floor). Identical input yields bit-identical
output; there is no learned state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import as_float_array, check_positive_int
from .audio_io import AudioClip, frame_signal
from .exceptions import SampleRateMismatch


@dataclass(frozen=True)
class EncoderConfig:
    """Parameters of the spectral encoder."""

    frame_len: int = 1024
    hop: int = 256
    n_bands: int = 32
    sample_rate: int = 16000
    log_floor: float = 1e-10

    def __post_init__(self):
        check_positive_int(self.frame_len, "frame_len")
        check_positive_int(self.hop, "hop")
        check_positive_int(self.sample_rate, "sample_rate")
        if self.n_bands < 2:
            raise ValueError(f"n_bands must be >= 2, got {self.n_bands}")
        if self.frame_len < 2 * self.n_bands:
            raise ValueError(
                f"frame_len {self.frame_len} too small for {self.n_bands} bands "
                f"(need frame_len >= 2 * n_bands)"
            )
        if self.log_floor <= 0:
            raise ValueError(f"log_floor must be positive, got {self.log_floor}")

    @property
    def frame_rate(self) -> float:
        return self.sample_rate / self.hop


@dataclass(frozen=True)
class LatentSequence:
    """T x D matrix of latent frames plus the frame rate in Hz."""

    frames: np.ndarray = field(repr=False)
    frame_rate: float

    def __post_init__(self):
        object.__setattr__(self, "frames", as_float_array(self.frames, "frames", ndim=2))
        if self.frames.shape[0] < 1:
            raise ValueError("latent sequence must hold at least one frame")
        if self.frame_rate <= 0:
            raise ValueError(f"frame_rate must be positive, got {self.frame_rate}")

    def __len__(self) -> int:
        return self.frames.shape[0]

    @property
    def dim(self) -> int:
        return self.frames.shape[1]


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_bands: int, frame_len: int, sample_rate: int) -> np.ndarray:
    """Triangular mel-spaced weights, shape (n_bands, frame_len // 2 + 1).

    Band b rises linearly (on the mel scale) from edge point b to its peak
    at point b + 1 and falls to zero at point b + 2, with the B + 2 edge
    points spaced uniformly in mel between 0 Hz and Nyquist. Peak weight is
    1, so every weight lies in [0, 1]. Band edges are inclusive on the left
    and exclusive on the right; a bin exactly on an edge gets weight 0.
    """
    n_bins = frame_len // 2 + 1
    points = np.linspace(hz_to_mel(0.0), hz_to_mel(sample_rate / 2.0), n_bands + 2)
    bin_mels = hz_to_mel(np.arange(n_bins) * sample_rate / frame_len)

    left = points[:-2, None]
    peak = points[1:-1, None]
    right = points[2:, None]
    rising = (bin_mels[None, :] - left) / (peak - left)
    falling = (right - bin_mels[None, :]) / (right - peak)
    return np.clip(np.minimum(rising, falling), 0.0, 1.0)


def band_peak_frequencies(cfg: EncoderConfig) -> np.ndarray:
    """Center (peak) frequency of each band in Hz."""
    points = np.linspace(hz_to_mel(0.0), hz_to_mel(cfg.sample_rate / 2.0), cfg.n_bands + 2)
    return mel_to_hz(points[1:-1])


def _hann(frame_len: int) -> np.ndarray:
    # periodic Hann window
    n = np.arange(frame_len)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / frame_len)


def encode_spectral(clip: AudioClip, cfg: EncoderConfig) -> LatentSequence:
    """Encode a clip into log band-energy latent frames.

    The clip's sample rate must equal ``cfg.sample_rate`` (resample on
    ingest); raises :class:`SampleRateMismatch` otherwise and
    :class:`SignalTooShort` when the clip cannot fill one frame.
    """
    if clip.sample_rate != cfg.sample_rate:
        raise SampleRateMismatch(
            f"clip at {clip.sample_rate} Hz, encoder configured for {cfg.sample_rate} Hz"
        )
    frames = frame_signal(clip, cfg.frame_len, cfg.hop)
    windowed = frames * _hann(cfg.frame_len)
    power = np.abs(np.fft.rfft(windowed, axis=1)) ** 2
    band_energy = power @ mel_filterbank(cfg.n_bands, cfg.frame_len, cfg.sample_rate).T
    latents = np.log(band_energy + cfg.log_floor)
    return LatentSequence(frames=latents, frame_rate=cfg.frame_rate)


class LogMelEncoder(TransformerMixin, BaseEstimator):
    """Stateless sklearn-style transformer wrapping :func:`encode_spectral`.

    ``transform`` accepts an :class:`AudioClip` or a 1-D sample array (then
    assumed to be at ``sample_rate``) and returns the T x D latent matrix.
    """

    def __init__(self, frame_len=1024, hop=256, n_bands=32, sample_rate=16000,
                 log_floor=1e-10):
        self.frame_len = frame_len
        self.hop = hop
        self.n_bands = n_bands
        self.sample_rate = sample_rate
        self.log_floor = log_floor

    def _config(self) -> EncoderConfig:
        return EncoderConfig(
            frame_len=self.frame_len,
            hop=self.hop,
            n_bands=self.n_bands,
            sample_rate=self.sample_rate,
            log_floor=self.log_floor,
        )

    def fit(self, X=None, y=None):
        self.config_ = self._config()  # validates the parameters
        return self

    def transform(self, X) -> np.ndarray:
        cfg = self._config()
        clip = X if isinstance(X, AudioClip) else AudioClip(X, cfg.sample_rate)
        return encode_spectral(clip, cfg).frames

    def encode(self, clip: AudioClip) -> LatentSequence:
        return encode_spectral(clip, self._config())
