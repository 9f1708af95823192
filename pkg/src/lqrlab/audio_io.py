"""WAV file I/O, resampling, and framing.

The reader accepts the plain RIFF/WAVE subset used by speech corpora:
PCM 16-bit, PCM 24-bit, and IEEE float-32, mono or multichannel.
Multichannel audio is downmixed to mono by the arithmetic mean of the
channels. The writer emits float-32 mono only, which is enough for the
degradation tool.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import as_float_array
from .exceptions import (
    EmptyAudio,
    MalformedHeader,
    SignalTooShort,
    UnsupportedEncoding,
)

_WAVE_FORMAT_PCM = 0x0001
_WAVE_FORMAT_IEEE_FLOAT = 0x0003
_WAVE_FORMAT_EXTENSIBLE = 0xFFFE


@dataclass(frozen=True)
class AudioClip:
    """Mono sample buffer with its sample rate.

    Samples are dimensionless amplitudes, conventionally within [-1, 1];
    they must be finite. ``sample_rate`` is in Hz and must be positive.
    """

    samples: np.ndarray = field(repr=False)
    sample_rate: int

    def __post_init__(self):
        object.__setattr__(self, "samples", as_float_array(self.samples, "samples", ndim=1))
        if int(self.sample_rate) <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return len(self.samples) / self.sample_rate


def _read_fmt_chunk(payload: bytes) -> tuple[int, int, int, int]:
    """Return (format_tag, channels, sample_rate, bits) from a fmt chunk."""
    if len(payload) < 16:
        raise MalformedHeader("fmt chunk shorter than 16 bytes")
    format_tag, channels, sample_rate, _byte_rate, _block_align, bits = struct.unpack_from(
        "<HHIIHH", payload, 0
    )
    if format_tag == _WAVE_FORMAT_EXTENSIBLE:
        # resolve the real format from the SubFormat GUID
        if len(payload) < 26:
            raise MalformedHeader("extensible fmt chunk truncated")
        (cb_size,) = struct.unpack_from("<H", payload, 16)
        if cb_size < 22 or len(payload) < 18 + 22:
            raise MalformedHeader("extensible fmt chunk truncated")
        (format_tag,) = struct.unpack_from("<H", payload, 24)
    return format_tag, channels, sample_rate, bits


def _decode_samples(raw: bytes, format_tag: int, bits: int, channels: int) -> np.ndarray:
    if format_tag == _WAVE_FORMAT_PCM and bits == 16:
        flat = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    elif format_tag == _WAVE_FORMAT_PCM and bits == 24:
        b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        value = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        value = (value ^ 0x800000) - 0x800000  # sign-extend 24-bit
        flat = value.astype(np.float64) / float(2**23)
    elif format_tag == _WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        flat = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    else:
        raise UnsupportedEncoding(
            f"unsupported WAV encoding: format tag {format_tag:#06x}, {bits}-bit"
        )
    if channels > 1:
        flat = flat.reshape(-1, channels).mean(axis=1)
    return flat


def load_wav(path) -> AudioClip:
    """Load a WAV file as a mono :class:`AudioClip`.

    Multichannel input is downmixed by the arithmetic mean of the channels.
    Integer samples are scaled by 1 / 2**(bits - 1).

    Raises :class:`MalformedHeader` for non-RIFF input or truncated chunks,
    :class:`UnsupportedEncoding` for codecs outside the PCM-16/PCM-24/
    float-32 subset, and :class:`EmptyAudio` for zero-length data.
    """
    data = Path(path).read_bytes()
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedHeader(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        if pos + 8 + size > len(data):
            raise MalformedHeader(
                f"{path}: chunk {chunk_id!r} of {size} bytes exceeds file size"
            )
        body = data[pos + 8 : pos + 8 + size]
        if chunk_id == b"fmt ":
            fmt = _read_fmt_chunk(body)
        elif chunk_id == b"data":
            payload = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned

    if fmt is None or payload is None:
        raise MalformedHeader(f"{path}: missing fmt or data chunk")
    format_tag, channels, sample_rate, bits = fmt
    if channels < 1 or sample_rate <= 0:
        raise MalformedHeader(f"{path}: invalid fmt fields")
    frame_bytes = channels * (bits // 8)
    if frame_bytes == 0 or len(payload) % frame_bytes:
        raise MalformedHeader(f"{path}: data chunk is not a whole number of frames")
    if len(payload) == 0:
        raise EmptyAudio(f"{path}: zero samples")

    samples = _decode_samples(payload, format_tag, bits, channels)
    return AudioClip(samples=samples, sample_rate=sample_rate)


def save_wav(clip: AudioClip, path) -> None:
    """Write a mono float-32 WAV file."""
    samples = clip.samples.astype("<f4")
    raw = samples.tobytes()
    header = b"".join(
        [
            b"RIFF",
            struct.pack("<I", 4 + 8 + 16 + 8 + len(raw)),
            b"WAVE",
            b"fmt ",
            struct.pack(
                "<IHHIIHH",
                16,
                _WAVE_FORMAT_IEEE_FLOAT,
                1,
                clip.sample_rate,
                clip.sample_rate * 4,
                4,
                32,
            ),
            b"data",
            struct.pack("<I", len(raw)),
        ]
    )
    Path(path).write_bytes(header + raw)


def resample_linear(clip: AudioClip, target_rate: int) -> AudioClip:
    """Resample by linear interpolation.

    Output length is round(input_length * target / source). Positions past
    the last input sample hold its value. Identity (the same object) when
    the rates already match.
    """
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if len(clip) == 0:
        raise EmptyAudio("cannot resample an empty clip")
    if target_rate == clip.sample_rate:
        return clip
    n_out = int(round(len(clip) * target_rate / clip.sample_rate))
    positions = np.arange(n_out) * (clip.sample_rate / target_rate)
    samples = np.interp(positions, np.arange(len(clip)), clip.samples)
    return AudioClip(samples=samples, sample_rate=target_rate)


def frame_signal(clip: AudioClip, frame_len: int, hop: int) -> np.ndarray:
    """Slice a clip into overlapping frames, shape (T, frame_len).

    T = floor((len - frame_len) / hop) + 1; the trailing remainder is
    dropped and no padding is applied. Frame t, index i equals
    sample[t * hop + i] exactly.
    """
    if frame_len < 2:
        raise ValueError(f"frame_len must be >= 2, got {frame_len}")
    if hop < 1:
        raise ValueError(f"hop must be >= 1, got {hop}")
    if len(clip) < frame_len:
        raise SignalTooShort(
            f"signal of {len(clip)} samples is shorter than one frame of {frame_len}"
        )
    n_frames = (len(clip) - frame_len) // hop + 1
    frames = np.lib.stride_tricks.sliding_window_view(clip.samples, frame_len)[
        : n_frames * hop : hop
    ]
    return np.ascontiguousarray(frames)
