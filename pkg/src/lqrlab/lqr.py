"""Stage-ratio quality metrics over a quantization trace.

The quantity tracked per stage is sigma_k, the per-frame dispersion of the
stage-k residual averaged over frames. Two metrics derive from it:

    stage ratio      LQR_k     = sigma_{k-1} / sigma_k
    input-to-final   LQR_{0,K} = sigma_0 / sigma_K

and mean_lqr is the arithmetic mean of the K stage ratios. Denominators
are floored at EPSILON instead of raising, with a ``clamped`` flag in the
report, so corpus scoring survives a pathological file. Higher values mean
the trained codebooks explain more of the signal, stage after stage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rvq
from ._sigma import check_mode, frame_sigma_rows
from ._validation import as_float_array
from .audio_io import AudioClip
from .encoder import EncoderConfig, encode_spectral
from .exceptions import IndexOutOfRange

EPSILON = 1e-12

SIGMA_FIRST = "sigma_first"
PER_FRAME = "per_frame"
_AVERAGING = (SIGMA_FIRST, PER_FRAME)


@dataclass(frozen=True)
class LqrReport:
    """Stage ratios and both summary metrics for one scored sequence."""

    stage_lqr: tuple[float, ...]
    mean_lqr: float
    input_to_final: float
    stage_sigma: tuple[float, ...]
    clamped: bool
    variance_mode: str

    @property
    def n_stages(self) -> int:
        return len(self.stage_lqr)

    def to_dict(self) -> dict:
        return {
            "stage_lqr": list(self.stage_lqr),
            "mean_lqr": self.mean_lqr,
            "input_to_final": self.input_to_final,
            "stage_sigma": list(self.stage_sigma),
            "clamped": self.clamped,
            "variance_mode": self.variance_mode,
        }

    def as_text(self, db: bool = False) -> str:
        """Flat key-value rendering, one metric per line."""

        def fmt(value: float) -> str:
            if db:
                return f"{10.0 * np.log10(max(value, EPSILON)):.6f}"
            return f"{value:.9g}"

        lines = [f"mean_lqr{'_db' if db else ''} {fmt(self.mean_lqr)}"]
        lines.append(f"input_to_final{'_db' if db else ''} {fmt(self.input_to_final)}")
        for k, value in enumerate(self.stage_lqr, start=1):
            lines.append(f"stage_lqr_{k}{'_db' if db else ''} {fmt(value)}")
        lines.append(f"clamped {'true' if self.clamped else 'false'}")
        lines.append(f"variance_mode {self.variance_mode}")
        return "\n".join(lines)


def frame_sigma(frame, mode: str = "variance") -> float:
    """Dispersion of one D-vector: population variance or mean square."""
    vec = as_float_array(frame, "frame", ndim=1)
    return float(frame_sigma_rows(vec[None, :], mode)[0])


def stage_sigmas(trace: rvq.QuantizationTrace, mode: str | None = None) -> tuple[float, ...]:
    """sigma_0..sigma_K of a trace: per-frame sigma, then mean over frames.

    With ``mode`` None the trace's own variance mode is used; passing a
    mode recomputes from the stored residuals, so a variance-mode trace
    can still be read out in power terms.
    """
    if mode is None:
        return trace.stage_sigma
    check_mode(mode)
    return tuple(
        float(frame_sigma_rows(trace.residuals[k], mode).mean())
        for k in range(trace.residuals.shape[0])
    )


def _floored_ratio(numerator: float, denominator: float) -> tuple[float, bool]:
    clamped = denominator < EPSILON
    return numerator / max(denominator, EPSILON), clamped


def lqr_stage(sigmas, k: int) -> float:
    """Stage ratio sigma_{k-1} / sigma_k for stage k in 1..K, floored."""
    sigmas = tuple(float(s) for s in sigmas)
    if not 1 <= k <= len(sigmas) - 1:
        raise IndexOutOfRange(f"stage {k} outside 1..{len(sigmas) - 1}")
    value, _ = _floored_ratio(sigmas[k - 1], sigmas[k])
    return value


def lqr_mean(sigmas) -> float:
    """Arithmetic mean of the stage ratios LQR_1..LQR_K."""
    sigmas = tuple(float(s) for s in sigmas)
    ratios = [lqr_stage(sigmas, k) for k in range(1, len(sigmas))]
    return float(np.mean(ratios))


def lqr_input_to_final(sigmas) -> float:
    """sigma_0 / sigma_K, floored like the stage ratios."""
    sigmas = tuple(float(s) for s in sigmas)
    if len(sigmas) < 2:
        raise IndexOutOfRange("need at least one stage")
    value, _ = _floored_ratio(sigmas[0], sigmas[-1])
    return value


def lqr_report(trace: rvq.QuantizationTrace, averaging: str = SIGMA_FIRST) -> LqrReport:
    """Assemble the full report for one trace.

    The default averaging computes each sigma_k over the whole sequence
    before taking ratios. ``per_frame`` instead forms the ratio within
    every frame and averages the ratios; it does not telescope and exists
    for sensitivity studies only.
    """
    if averaging not in _AVERAGING:
        raise ValueError(f"averaging must be one of {_AVERAGING}, got {averaging!r}")
    sigmas = trace.stage_sigma
    n_stages = len(sigmas) - 1
    if n_stages < 1:
        raise IndexOutOfRange("trace has no quantization stages")

    if averaging == SIGMA_FIRST:
        clamped = False
        stage_values = []
        for k in range(1, n_stages + 1):
            value, hit = _floored_ratio(sigmas[k - 1], sigmas[k])
            stage_values.append(value)
            clamped = clamped or hit
        final, hit = _floored_ratio(sigmas[0], sigmas[-1])
        clamped = clamped or hit
        mean_value = float(np.mean(stage_values))
    else:
        rows = np.stack([
            frame_sigma_rows(trace.residuals[k], trace.variance_mode)
            for k in range(n_stages + 1)
        ])
        floored = np.maximum(rows, EPSILON)
        clamped = bool((rows[1:] < EPSILON).any())
        stage_values = [float(np.mean(rows[k - 1] / floored[k])) for k in range(1, n_stages + 1)]
        final = float(np.mean(rows[0] / floored[-1]))
        mean_value = float(np.mean(stage_values))

    return LqrReport(
        stage_lqr=tuple(stage_values),
        mean_lqr=mean_value,
        input_to_final=final,
        stage_sigma=tuple(float(s) for s in sigmas),
        clamped=clamped,
        variance_mode=trace.variance_mode,
    )


def score_latents(model: rvq.RvqModel, latents, averaging: str = SIGMA_FIRST) -> LqrReport:
    """Quantize a latent sequence and report its metrics."""
    return lqr_report(rvq.quantize(model, latents), averaging=averaging)


def score_clip(model: rvq.RvqModel, cfg: EncoderConfig, clip: AudioClip,
               averaging: str = SIGMA_FIRST) -> LqrReport:
    """Encode a clip, quantize it, and report its metrics. Deterministic."""
    return score_latents(model, encode_spectral(clip, cfg), averaging=averaging)
