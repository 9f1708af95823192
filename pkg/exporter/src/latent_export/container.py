"""Writer for the LTNT latent-interchange container.

Layout, all little-endian:

    bytes 0..3    magic "LTNT"
    bytes 4..23   u32 version (1), tensor count, dim, sample_rate, hop
    per tensor    u8 role, u32 frame count, then frames x dim float32

Role 0 is the encoder latent sequence and appears exactly once, first.
Role 1 tensors are per-stage quantizer outputs in stage order and share
the latent tensor's shape.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import ExportShapeError

MAGIC = b"LTNT"
VERSION = 1
ROLE_LATENT = 0
ROLE_STAGE = 1

_HEADER = struct.Struct("<IIIII")
_RECORD = struct.Struct("<BI")


def _as_tensor(array, name: str) -> np.ndarray:
    tensor = np.ascontiguousarray(array, dtype="<f4")
    if tensor.ndim != 2 or tensor.shape[0] < 1:
        raise ExportShapeError(f"{name} must be a nonempty frames x dim matrix, "
                               f"got shape {tensor.shape}")
    if not np.all(np.isfinite(tensor)):
        raise ExportShapeError(f"{name} contains non-finite values")
    return tensor


def write_container(path, latents, stage_outputs, sample_rate: int, hop: int) -> int:
    """Write one latent tensor plus its stage outputs. Returns bytes written."""
    latent_tensor = _as_tensor(latents, "latents")
    stage_tensors = [
        _as_tensor(q, f"stage output {k + 1}") for k, q in enumerate(stage_outputs)
    ]
    for k, tensor in enumerate(stage_tensors):
        if tensor.shape != latent_tensor.shape:
            raise ExportShapeError(
                f"stage output {k + 1} shape {tensor.shape} does not match "
                f"latent shape {latent_tensor.shape}"
            )
    if sample_rate <= 0 or hop <= 0:
        raise ExportShapeError("sample_rate and hop must be positive")

    count = 1 + len(stage_tensors)
    dim = latent_tensor.shape[1]
    blob = bytearray()
    blob += MAGIC
    blob += _HEADER.pack(VERSION, count, dim, sample_rate, hop)
    for role, tensor in [(ROLE_LATENT, latent_tensor)] + [
        (ROLE_STAGE, t) for t in stage_tensors
    ]:
        blob += _RECORD.pack(role, tensor.shape[0])
        blob += tensor.tobytes(order="C")
    Path(path).write_bytes(bytes(blob))
    return len(blob)
