"""Run a codec on a WAV file and capture its quantization stages.

The latent tensor is tapped at the codec encoder's output; each stage
output is the codeword the corresponding quantizer layer selects for the
running residual. Before anything is written, the stage sums are checked
against the codec's own decode path, so a container can only exist if
the captured tensors actually reproduce the codec's arithmetic.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from . import container
from .codecs import load_codec, resolve
from .errors import CodecRateMismatch, ExportShapeError

log = logging.getLogger("latent_export")

# agreement required between captured stage sums and the codec's decoder
VERIFY_TOLERANCE = 1e-5


@dataclass(frozen=True)
class ExportSpec:
    codec_id: str
    input: str
    output: str
    max_stages: int | None = None
    checkpoint: str | None = None  # local override of the registry checkpoint

    def __post_init__(self):
        if self.max_stages is not None and self.max_stages < 1:
            raise ValueError(f"max_stages must be >= 1, got {self.max_stages}")


@dataclass(frozen=True)
class ExportResult:
    output: str
    codec_id: str
    checkpoint: str
    n_stages: int
    n_frames: int
    dim: int
    sample_rate: int
    hop: int
    residual_error: float
    resampled_from: int | None = None


def _load_wav_mono(path) -> tuple[np.ndarray, int]:
    rate, data = wavfile.read(path)
    if data.ndim == 2:
        data = data.mean(axis=1)
    if data.dtype == np.int16:
        samples = data.astype(np.float32) / 32768.0
    elif data.dtype == np.int32:
        samples = data.astype(np.float32) / 2147483648.0
    elif data.dtype == np.uint8:
        samples = (data.astype(np.float32) - 128.0) / 128.0
    else:
        samples = data.astype(np.float32)
    if samples.size == 0:
        raise ExportShapeError(f"{path}: no samples")
    return samples, int(rate)


def _resample(samples: np.ndarray, rate: int, target: int) -> np.ndarray:
    from scipy.signal import resample_poly

    g = math.gcd(rate, target)
    return resample_poly(samples, target // g, rate // g).astype(np.float32)


def _capture_stages(model, samples: np.ndarray, bandwidth: float | None,
                    max_stages: int | None):
    import torch

    with torch.no_grad():
        x = torch.from_numpy(samples)[None, None, :]
        embeddings = model.encoder(x)
        quantizer = model.quantizer
        n_stages = quantizer.get_num_quantizers_for_bandwidth(bandwidth)
        n_stages = min(n_stages, len(quantizer.layers))
        if max_stages is not None:
            n_stages = min(n_stages, max_stages)

        residual = embeddings
        outputs, codes = [], []
        for layer in quantizer.layers[:n_stages]:
            indices = layer.encode(residual)
            quantized = layer.decode(indices)
            residual = residual - quantized
            outputs.append(quantized)
            codes.append(indices)

        # independent path: the codec's own decoder must rebuild the same sum
        decoded = quantizer.decode(torch.stack(codes))
        stage_sum = sum(outputs)
        decode_gap = float((stage_sum - decoded).abs().max())
        residual_error = float((embeddings - stage_sum - residual).abs().max())

    latents = embeddings[0].T.numpy()
    stage_list = [q[0].T.numpy() for q in outputs]
    return latents, stage_list, decode_gap, residual_error


def _write_provenance(spec: ExportSpec, result: ExportResult, entry) -> None:
    import transformers

    lines = [
        f"codec_id {result.codec_id}",
        f"checkpoint {result.checkpoint}",
        f"family {entry.family}",
        f"runtime transformers=={transformers.__version__}",
        f"sample_rate {result.sample_rate}",
        f"hop {result.hop}",
        f"stages {result.n_stages}",
        "tap latents=encoder_output "
        "stage_outputs=per_layer_decoded_codeword_increment",
        f"residual_error {result.residual_error:.3g}",
    ]
    if entry.bandwidth_kbps is not None:
        lines.insert(3, f"bandwidth_kbps {entry.bandwidth_kbps:g}")
    if result.resampled_from is not None:
        lines.append(f"resampled_from {result.resampled_from}")
    Path(str(result.output) + ".provenance.txt").write_text("\n".join(lines) + "\n")


def export(spec: ExportSpec) -> ExportResult:
    entry = resolve(spec.codec_id)
    model = load_codec(entry, spec.checkpoint)
    codec_rate = int(model.config.sampling_rate)
    hop = int(np.prod(model.config.upsampling_ratios))

    samples, rate = _load_wav_mono(spec.input)
    resampled_from = None
    if rate != codec_rate:
        warnings.warn(CodecRateMismatch(
            f"{spec.input}: {rate} Hz input resampled to the codec's "
            f"{codec_rate} Hz"))
        log.warning("resampling %s from %d Hz to %d Hz", spec.input, rate, codec_rate)
        samples = _resample(samples, rate, codec_rate)
        resampled_from = rate

    latents, stage_list, decode_gap, residual_error = _capture_stages(
        model, samples, entry.bandwidth_kbps, spec.max_stages
    )
    if decode_gap > VERIFY_TOLERANCE:
        raise ExportShapeError(
            f"captured stage sums disagree with the codec decoder by "
            f"{decode_gap:.3g} (tolerance {VERIFY_TOLERANCE:g})"
        )
    if residual_error > VERIFY_TOLERANCE:
        raise ExportShapeError(
            f"latent minus stage sums drifts from the codec residual by "
            f"{residual_error:.3g} (tolerance {VERIFY_TOLERANCE:g})"
        )

    container.write_container(spec.output, latents, stage_list, codec_rate, hop)
    result = ExportResult(
        output=str(spec.output),
        codec_id=spec.codec_id,
        checkpoint=spec.checkpoint if spec.checkpoint is not None else entry.checkpoint,
        n_stages=len(stage_list),
        n_frames=latents.shape[0],
        dim=latents.shape[1],
        sample_rate=codec_rate,
        hop=hop,
        residual_error=residual_error,
        resampled_from=resampled_from,
    )
    _write_provenance(spec, result, entry)
    return result
