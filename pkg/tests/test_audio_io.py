"""WAV parsing, downmix, resampling, and framing."""

import struct

import numpy as np
import pytest

from lqrlab import AudioClip, frame_signal, load_wav, resample_linear, save_wav
from lqrlab.exceptions import (
    EmptyAudio,
    MalformedHeader,
    SignalTooShort,
    UnsupportedEncoding,
)


def _wav_bytes(fmt_tag, channels, rate, bits, payload, fmt_extra=b""):
    """Assemble a minimal RIFF/WAVE file by hand."""
    block_align = channels * bits // 8
    fmt = struct.pack(
        "<HHIIHH", fmt_tag, channels, rate, rate * block_align, block_align, bits
    ) + fmt_extra
    chunks = b"WAVE"
    chunks += b"fmt " + struct.pack("<I", len(fmt)) + fmt + (b"\x00" if len(fmt) % 2 else b"")
    chunks += b"data" + struct.pack("<I", len(payload)) + payload
    return b"RIFF" + struct.pack("<I", len(chunks)) + chunks


def _write(tmp_path, name, blob):
    path = tmp_path / name
    path.write_bytes(blob)
    return path


class TestLoadWav:
    def test_pcm16_scaling_convention(self, tmp_path):
        payload = struct.pack("<4h", 32767, -32768, 16384, 0)
        clip = load_wav(_write(tmp_path, "a.wav", _wav_bytes(1, 1, 16000, 16, payload)))
        np.testing.assert_allclose(
            clip.samples, [32767 / 32768, -1.0, 0.5, 0.0], atol=0
        )
        assert clip.sample_rate == 16000

    def test_stereo_mean_downmix_cancels(self, tmp_path):
        frames = []
        for _ in range(8):
            frames += [16384, -16384]  # (0.5, -0.5) per frame
        payload = struct.pack(f"<{len(frames)}h", *frames)
        clip = load_wav(_write(tmp_path, "s.wav", _wav_bytes(1, 2, 8000, 16, payload)))
        assert len(clip) == 8
        np.testing.assert_array_equal(clip.samples, np.zeros(8))

    def test_pcm24_sign_extension(self, tmp_path):
        # +2^23-1 and -2^23 in packed little-endian 3-byte frames
        payload = b"\xff\xff\x7f" + b"\x00\x00\x80"
        clip = load_wav(_write(tmp_path, "p24.wav", _wav_bytes(1, 1, 16000, 24, payload)))
        np.testing.assert_allclose(clip.samples, [(2**23 - 1) / 2**23, -1.0])

    def test_float32_passthrough(self, tmp_path):
        payload = struct.pack("<3f", 0.25, -0.75, 1.0)
        clip = load_wav(_write(tmp_path, "f.wav", _wav_bytes(3, 1, 44100, 32, payload)))
        np.testing.assert_allclose(clip.samples, [0.25, -0.75, 1.0], rtol=1e-7)

    def test_data_chunk_longer_than_file(self, tmp_path):
        blob = _wav_bytes(1, 1, 16000, 16, struct.pack("<2h", 1, 2))
        # inflate the data chunk's declared size beyond the file end
        bad = blob.replace(b"data" + struct.pack("<I", 4), b"data" + struct.pack("<I", 400))
        with pytest.raises(MalformedHeader):
            load_wav(_write(tmp_path, "bad.wav", bad))

    def test_not_riff(self, tmp_path):
        with pytest.raises(MalformedHeader):
            load_wav(_write(tmp_path, "x.wav", b"OggS" + b"\x00" * 40))

    def test_compressed_rejected(self, tmp_path):
        blob = _wav_bytes(85, 1, 16000, 16, b"\x00\x00")  # mp3-in-wav tag
        with pytest.raises(UnsupportedEncoding):
            load_wav(_write(tmp_path, "mp3.wav", blob))

    def test_zero_samples(self, tmp_path):
        with pytest.raises(EmptyAudio):
            load_wav(_write(tmp_path, "e.wav", _wav_bytes(1, 1, 16000, 16, b"")))


class TestSaveWav:
    def test_round_trip_float32(self, tmp_path):
        clip = AudioClip(samples=np.linspace(-1, 1, 64), sample_rate=22050)
        path = tmp_path / "rt.wav"
        save_wav(clip, path)
        back = load_wav(path)
        assert back.sample_rate == 22050
        np.testing.assert_allclose(back.samples, clip.samples, atol=1e-7)


class TestResample:
    def test_identity_when_rates_match(self, short_clip):
        assert resample_linear(short_clip, short_clip.sample_rate) is short_clip

    def test_hand_evaluated_downsample(self):
        clip = AudioClip(samples=np.array([0.0, 1.0, 0.0, -1.0]), sample_rate=4)
        out = resample_linear(clip, 2)
        assert out.sample_rate == 2
        np.testing.assert_allclose(out.samples, [0.0, 0.0], atol=0)

    def test_constant_stays_constant(self):
        clip = AudioClip(samples=np.full(100, 0.25), sample_rate=8000)
        out = resample_linear(clip, 12000)
        assert len(out) == round(100 * 12000 / 8000)
        np.testing.assert_allclose(out.samples, 0.25, atol=0)


class TestFrameSignal:
    @pytest.mark.parametrize("length,expected", [(1024, 1), (2048, 5)])
    def test_frame_count_formula(self, length, expected):
        clip = AudioClip(samples=np.zeros(length), sample_rate=16000)
        assert frame_signal(clip, 1024, 256).shape == (expected, 1024)

    def test_too_short(self):
        clip = AudioClip(samples=np.zeros(1023), sample_rate=16000)
        with pytest.raises(SignalTooShort):
            frame_signal(clip, 1024, 256)

    def test_frames_are_exact_slices(self, philox):
        samples = philox(0).uniform(-1, 1, 700)
        frames = frame_signal(AudioClip(samples=samples, sample_rate=8000), 256, 100)
        for t in range(frames.shape[0]):
            np.testing.assert_array_equal(frames[t], samples[t * 100 : t * 100 + 256])


class TestAudioClip:
    def test_rejects_nonfinite(self):
        with pytest.raises(Exception):
            AudioClip(samples=np.array([0.0, np.nan]), sample_rate=8000)

    def test_duration(self):
        clip = AudioClip(samples=np.zeros(8000), sample_rate=16000)
        assert clip.duration == 0.5
