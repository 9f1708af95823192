"""Speech quality estimation from residual quantization error ratios.

Pipeline: a deterministic log-mel spectral encoder turns audio into latent
frames; stage codebooks trained with k-means quantize those frames as a
residual cascade; the per-stage ratio of averaged frame variances yields
the quality metrics. Degradation generators, correlation statistics, and
a manifest evaluation harness sit on top, with `lqrlab` as the CLI.
"""

from .audio_io import AudioClip, frame_signal, load_wav, resample_linear, save_wav
from .degrade import (
    DegradationOutcome,
    DegradationSpec,
    add_noise_snr,
    apply_degradation,
    lowpass,
    peak_clip,
    seeded_noise,
)
from .encoder import (
    EncoderConfig,
    LatentSequence,
    LogMelEncoder,
    band_peak_frequencies,
    encode_spectral,
    mel_filterbank,
)
from .harness import (
    CorrelationReport,
    ManifestEntry,
    StatRow,
    evaluate,
    load_manifest,
    score_media,
    write_report,
)
from .lqr import (
    EPSILON,
    LqrReport,
    frame_sigma,
    lqr_input_to_final,
    lqr_mean,
    lqr_report,
    lqr_stage,
    score_clip,
    score_latents,
    stage_sigmas,
)
from .ltnt import LtntFile, load_latents, write_ltnt
from .rvq import (
    Codebook,
    QuantizationTrace,
    ResidualQuantizer,
    RvqModel,
    kmeans,
    load_model,
    quantize,
    save_model,
    trace_from_stage_outputs,
    train_codebooks,
)
from .stats import average_ranks, pearson, snr_baseline, spearman
from .synth import reference_corpus, voiced_clip

__version__ = "0.1.0"

__all__ = [
    "AudioClip",
    "Codebook",
    "CorrelationReport",
    "DegradationOutcome",
    "DegradationSpec",
    "EPSILON",
    "EncoderConfig",
    "LatentSequence",
    "LogMelEncoder",
    "LqrReport",
    "LtntFile",
    "ManifestEntry",
    "QuantizationTrace",
    "ResidualQuantizer",
    "RvqModel",
    "StatRow",
    "add_noise_snr",
    "apply_degradation",
    "average_ranks",
    "band_peak_frequencies",
    "encode_spectral",
    "evaluate",
    "frame_signal",
    "frame_sigma",
    "kmeans",
    "load_latents",
    "load_manifest",
    "load_model",
    "load_wav",
    "lowpass",
    "lqr_input_to_final",
    "lqr_mean",
    "lqr_report",
    "lqr_stage",
    "mel_filterbank",
    "peak_clip",
    "pearson",
    "quantize",
    "reference_corpus",
    "resample_linear",
    "save_model",
    "save_wav",
    "score_clip",
    "score_latents",
    "score_media",
    "seeded_noise",
    "snr_baseline",
    "spearman",
    "stage_sigmas",
    "trace_from_stage_outputs",
    "train_codebooks",
    "voiced_clip",
    "write_ltnt",
    "write_report",
]
