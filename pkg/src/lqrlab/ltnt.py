"""LTNT latent-tensor container, the import path for external encoders.

Layout, little-endian throughout:

    magic       4 bytes  "LTNT"
    version     u32      1
    tensor_count u32     M
    dim         u32      D
    sample_rate u32      Hz of the source audio
    hop         u32      encoder hop in source samples
    M records, each:
        role    u8       0 = latent x, 1 = quantized stage output (in order)
        T       u32      frame count
        values  T*D f32  row-major (frame-major)

Exactly one role-0 tensor is required; role-1 tensors, if present, are the
ordered per-stage quantizer outputs and must share T and D with the
latents.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .encoder import LatentSequence
from .exceptions import (
    BadMagic,
    InconsistentDims,
    TruncatedFile,
    TruncatedTensor,
    VersionUnsupported,
)

MAGIC = b"LTNT"
VERSION = 1

ROLE_LATENT = 0
ROLE_STAGE_OUTPUT = 1


@dataclass(frozen=True)
class LtntFile:
    """Parsed container: latents plus zero or more stage outputs."""

    latents: LatentSequence
    stage_outputs: tuple[np.ndarray, ...] = field(default=(), repr=False)
    sample_rate: int = 0
    hop: int = 0

    @property
    def n_stages(self) -> int:
        return len(self.stage_outputs)


def write_ltnt(path, latents, sample_rate: int, hop: int,
               stage_outputs=()) -> None:
    """Write latents (T x D) and optional stage outputs to an LTNT file."""
    tensors = [np.asarray(latents, dtype="<f4")] + [
        np.asarray(q, dtype="<f4") for q in stage_outputs
    ]
    t, d = tensors[0].shape
    for q in tensors[1:]:
        if q.shape != (t, d):
            raise InconsistentDims(f"stage output shape {q.shape} != latent shape {(t, d)}")
    out = bytearray()
    out += MAGIC
    out += struct.pack("<IIIII", VERSION, len(tensors), d, sample_rate, hop)
    for role, tensor in zip([ROLE_LATENT] + [ROLE_STAGE_OUTPUT] * (len(tensors) - 1), tensors):
        out += struct.pack("<BI", role, tensor.shape[0])
        out += tensor.tobytes()
    Path(path).write_bytes(bytes(out))


def load_latents(path) -> LtntFile:
    """Parse an LTNT container.

    Returns the role-0 tensor as a :class:`LatentSequence`; role-1 tensors,
    if present, are the ordered stage outputs. Raises :class:`BadMagic`,
    :class:`VersionUnsupported`, :class:`TruncatedTensor`, or
    :class:`InconsistentDims` on invalid input.
    """
    data = Path(path).read_bytes()
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagic(f"{path}: not an LTNT container")
    if len(data) < 24:
        raise TruncatedFile(f"{path}: header truncated")
    version, count, dim, sample_rate, hop = struct.unpack_from("<IIIII", data, 4)
    if version != VERSION:
        raise VersionUnsupported(f"{path}: LTNT version {version} not supported")
    if count < 1 or dim < 1:
        raise InconsistentDims(f"{path}: invalid tensor count {count} or dim {dim}")

    pos = 24
    latent = None
    stages: list[np.ndarray] = []
    for i in range(count):
        if pos + 5 > len(data):
            raise TruncatedTensor(f"{path}: tensor {i} header truncated")
        role, t = struct.unpack_from("<BI", data, pos)
        pos += 5
        n_bytes = t * dim * 4
        if pos + n_bytes > len(data):
            raise TruncatedTensor(f"{path}: tensor {i} data truncated")
        values = np.frombuffer(data, dtype="<f4", count=t * dim, offset=pos)
        pos += n_bytes
        tensor = values.reshape(t, dim).astype(np.float64)
        if role == ROLE_LATENT:
            if latent is not None:
                raise InconsistentDims(f"{path}: more than one role-0 tensor")
            latent = tensor
        elif role == ROLE_STAGE_OUTPUT:
            stages.append(tensor)
        else:
            raise InconsistentDims(f"{path}: unknown tensor role {role}")

    if latent is None:
        raise InconsistentDims(f"{path}: no role-0 latent tensor")
    for k, q in enumerate(stages):
        if q.shape != latent.shape:
            raise InconsistentDims(
                f"{path}: stage tensor {k + 1} shape {q.shape} != latent shape {latent.shape}"
            )
    frame_rate = sample_rate / hop if hop else 1.0
    return LtntFile(
        latents=LatentSequence(frames=latent, frame_rate=frame_rate),
        stage_outputs=tuple(stages),
        sample_rate=sample_rate,
        hop=hop,
    )
