"""Export neural audio codec latents to LTNT interchange containers."""

from .codecs import REGISTRY, CodecEntry, load_codec, resolve
from .container import write_container
from .errors import (
    CheckpointMissing,
    CodecRateMismatch,
    ExportError,
    ExportShapeError,
    UnknownCodec,
)
from .export import ExportResult, ExportSpec, export

__version__ = "0.1.0"

__all__ = [
    "REGISTRY",
    "CodecEntry",
    "CheckpointMissing",
    "CodecRateMismatch",
    "ExportError",
    "ExportResult",
    "ExportShapeError",
    "ExportSpec",
    "UnknownCodec",
    "export",
    "load_codec",
    "resolve",
    "write_container",
]
