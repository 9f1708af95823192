"""Codec registry: stable ids mapped to published checkpoints.

Checkpoints are never bundled. Loading fails fast with instructions when
the referenced checkpoint is not available locally; pass an explicit
local path to use a checkpoint stored outside the default cache.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CheckpointMissing, UnknownCodec


@dataclass(frozen=True)
class CodecEntry:
    codec_id: str
    family: str
    checkpoint: str
    # stage selector for codecs whose quantizer depth follows a bitrate
    bandwidth_kbps: float | None = None
    notes: str = ""


_ENCODEC_24K = "facebook/encodec_24khz"

REGISTRY: dict[str, CodecEntry] = {
    entry.codec_id: entry
    for entry in [
        CodecEntry("encodec-1.5", "encodec", _ENCODEC_24K, 1.5),
        CodecEntry("encodec-3", "encodec", _ENCODEC_24K, 3.0),
        CodecEntry("encodec-6", "encodec", _ENCODEC_24K, 6.0),
        CodecEntry("encodec-12", "encodec", _ENCODEC_24K, 12.0),
        CodecEntry("encodec-24", "encodec", _ENCODEC_24K, 24.0),
        CodecEntry(
            "audiodec-vctk", "audiodec",
            "AudioDec v1.0 symAD_vctk_48000_hop300",
            notes="requires the AudioDec toolkit; fetch the checkpoint from "
                  "github.com/facebookresearch/AudioDec releases",
        ),
        CodecEntry(
            "audiodec-libritts", "audiodec",
            "AudioDec v1.0 symAD_libritts_24000_hop300",
            notes="requires the AudioDec toolkit; fetch the checkpoint from "
                  "github.com/facebookresearch/AudioDec releases",
        ),
        CodecEntry(
            "funcodec-general", "funcodec",
            "alibaba-damo/audio_codec-encodec-zh_en-general-16k-nq32ds640-pytorch",
            notes="requires the FunCodec toolkit; fetch the checkpoint from "
                  "the FunCodec model zoo",
        ),
        CodecEntry(
            "funcodec-academic", "funcodec",
            "alibaba-damo/audio_codec-encodec-en-libritts-16k-nq32ds640-pytorch",
            notes="requires the FunCodec toolkit; fetch the checkpoint from "
                  "the FunCodec model zoo",
        ),
    ]
}


def resolve(codec_id: str) -> CodecEntry:
    try:
        return REGISTRY[codec_id]
    except KeyError:
        known = ", ".join(sorted(REGISTRY))
        raise UnknownCodec(f"unknown codec id {codec_id!r}; known ids: {known}") from None


def load_codec(entry: CodecEntry, checkpoint: str | None = None):
    """Instantiate the codec behind an entry, in eval mode on CPU.

    Only the encodec family has a bundled loader. Other families are
    registered so their checkpoint identities stay stable, and loading
    them points at the upstream tooling instead.
    """
    if entry.family != "encodec":
        raise CheckpointMissing(
            f"{entry.codec_id}: no bundled loader for the {entry.family} family "
            f"(checkpoint: {entry.checkpoint}). {entry.notes}"
        )
    from transformers import EncodecModel  # deferred: torch import is slow

    source = checkpoint if checkpoint is not None else entry.checkpoint
    try:
        model = EncodecModel.from_pretrained(source, local_files_only=True)
    except (OSError, EnvironmentError) as exc:
        raise CheckpointMissing(
            f"checkpoint for {entry.codec_id} not found at {source!r}; "
            f"download it first, e.g. `hf download {entry.checkpoint}`, "
            f"or pass a local checkpoint directory"
        ) from exc
    return model.eval()
