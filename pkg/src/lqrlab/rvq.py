"""Residual vector quantization: codebook training and the stage cascade.

Codebooks are trained with Lloyd's algorithm (k-means++ seeding, squared
Euclidean distance), stage by stage on the residuals of the stages before.
Quantization runs the cascade

    e_0 = x,    q_k = nearest codeword to e_{k-1},    e_k = e_{k-1} - q_k,

recording residuals, code indices, and the per-stage averaged frame
dispersion that the quality metrics are built from.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._rng import philox_generator
from ._sigma import check_mode, mean_frame_sigma
from ._validation import check_matrix, check_positive_int, check_same_dim
from .encoder import LatentSequence
from .exceptions import (
    BadMagic,
    DimensionMismatch,
    TooFewVectors,
    TruncatedFile,
    VersionUnsupported,
)

_CONVERGENCE_RTOL = 1e-10
_DIST_CHUNK = 16384

RVQM_MAGIC = b"RVQM"
RVQM_VERSION = 1


@dataclass(frozen=True)
class Codebook:
    """N x D codeword matrix, optionally with its training distortion curve."""

    codewords: np.ndarray = field(repr=False)
    distortions: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "codewords", check_matrix(self.codewords, "codewords"))

    @property
    def size(self) -> int:
        return self.codewords.shape[0]

    @property
    def dim(self) -> int:
        return self.codewords.shape[1]


@dataclass(frozen=True)
class RvqModel:
    """Ordered stage codebooks sharing one dimension, plus metric flags."""

    stages: tuple[Codebook, ...]
    variance_mode: str = "variance"
    zero_codeword: bool = False
    trained_on: str = ""

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if not self.stages:
            raise ValueError("model needs at least one stage")
        dims = {cb.dim for cb in self.stages}
        if len(dims) != 1:
            raise DimensionMismatch(f"stage codebooks disagree on dimension: {sorted(dims)}")
        check_mode(self.variance_mode)

    @property
    def n_stages(self) -> int:
        return len(self.stages)

    @property
    def dim(self) -> int:
        return self.stages[0].dim

    @property
    def codebook_size(self) -> int:
        return self.stages[0].size


@dataclass(frozen=True)
class QuantizationTrace:
    """Residuals e_0..e_K, code indices, and per-stage averaged sigmas.

    ``residuals`` has shape (K+1, T, D) with e_0 = x at index 0 and
    e_k = e_{k-1} - q_k exactly. ``codes`` is a (K, T) integer matrix, or
    None when the stage outputs came from an external quantizer whose
    indices are unknown.
    """

    residuals: np.ndarray = field(repr=False)
    codes: np.ndarray | None = field(repr=False)
    stage_sigma: tuple[float, ...]
    variance_mode: str

    @property
    def n_stages(self) -> int:
        return self.residuals.shape[0] - 1

    @property
    def stage_outputs(self) -> np.ndarray:
        """Per-stage codeword contributions q_k, shape (K, T, D)."""
        return -np.diff(self.residuals, axis=0)


def _nearest_codes(vectors: np.ndarray, codewords: np.ndarray) -> np.ndarray:
    """Index of the nearest codeword per vector; ties go to the lowest index."""
    codes = np.empty(vectors.shape[0], dtype=np.int64)
    cw_sq = np.square(codewords).sum(axis=1)
    for start in range(0, vectors.shape[0], _DIST_CHUNK):
        block = vectors[start : start + _DIST_CHUNK]
        dists = (
            np.square(block).sum(axis=1)[:, None]
            + cw_sq[None, :]
            - 2.0 * (block @ codewords.T)
        )
        codes[start : start + _DIST_CHUNK] = np.argmin(dists, axis=1)
    return codes


def _assigned_distortion(vectors, codewords, codes) -> float:
    return float(np.square(vectors - codewords[codes]).sum())


def _kmeans_pp_init(vectors: np.ndarray, n: int, rng) -> np.ndarray:
    """k-means++ seeding: spread initial centroids by squared distance."""
    centroids = np.empty((n, vectors.shape[1]))
    centroids[0] = vectors[int(rng.integers(vectors.shape[0]))]
    closest = np.square(vectors - centroids[0]).sum(axis=1)
    for j in range(1, n):
        total = closest.sum()
        if total > 0:
            idx = int(rng.choice(vectors.shape[0], p=closest / total))
        else:
            idx = int(rng.integers(vectors.shape[0]))
        centroids[j] = vectors[idx]
        closest = np.minimum(closest, np.square(vectors - centroids[j]).sum(axis=1))
    return centroids


def _cluster_means(vectors, codes, n) -> tuple[np.ndarray, np.ndarray]:
    counts = np.bincount(codes, minlength=n)
    sums = np.empty((n, vectors.shape[1]))
    for dim in range(vectors.shape[1]):
        sums[:, dim] = np.bincount(codes, weights=vectors[:, dim], minlength=n)
    means = np.divide(sums, counts[:, None], out=np.zeros_like(sums), where=counts[:, None] > 0)
    return means, counts


def _repair_empty(centroids, counts, vectors, codes) -> None:
    # move each empty centroid onto the vector currently farthest from its
    # own centroid, excluding vectors already used for a repair
    empty = np.flatnonzero(counts == 0)
    if empty.size == 0:
        return
    dists = np.square(vectors - centroids[codes]).sum(axis=1)
    for j in empty:
        idx = int(np.argmax(dists))
        centroids[j] = vectors[idx]
        dists[idx] = -1.0


def _lloyd(vectors, n, rng, max_iters) -> tuple[np.ndarray, list[float]]:
    centroids = _kmeans_pp_init(vectors, n, rng)
    history: list[float] = []
    for _ in range(max_iters):
        codes = _nearest_codes(vectors, centroids)
        distortion = _assigned_distortion(vectors, centroids, codes)
        history.append(distortion)
        if len(history) > 1:
            prev = history[-2]
            if distortion == 0.0 or prev - distortion < _CONVERGENCE_RTOL * prev:
                break
        elif distortion == 0.0:
            break
        centroids, counts = _cluster_means(vectors, codes, n)
        _repair_empty(centroids, counts, vectors, codes)
    return centroids, history


def kmeans(vectors, n_codewords: int, seed: int, max_iters: int = 100,
           restarts: int = 1) -> Codebook:
    """Train a codebook with Lloyd's algorithm.

    Seeding is k-means++ driven by a Philox generator keyed from ``seed``;
    assignment uses squared Euclidean distance with ties resolved to the
    lowest codeword index; empty clusters are re-seeded to the vector
    farthest from its centroid. Iteration stops at ``max_iters`` or when
    the total distortion decreases by less than 1e-10 relative. With
    ``restarts`` > 1 the best run by final distortion is kept.

    The returned codebook carries the winning run's per-iteration total
    distortion in ``distortions``.
    """
    vectors = check_matrix(vectors, "vectors")
    check_positive_int(n_codewords, "n_codewords")
    check_positive_int(max_iters, "max_iters")
    check_positive_int(restarts, "restarts")
    if vectors.shape[0] < n_codewords:
        raise TooFewVectors(
            f"{vectors.shape[0]} vectors cannot fill {n_codewords} codewords"
        )

    rng = philox_generator(seed)
    best: tuple[np.ndarray, list[float]] | None = None
    for _ in range(restarts):
        centroids, history = _lloyd(vectors, n_codewords, rng, max_iters)
        if best is None or history[-1] < best[1][-1]:
            best = (centroids, history)
    return Codebook(codewords=best[0], distortions=tuple(best[1]))


def _corpus_frames(latent_corpus) -> np.ndarray:
    seqs = latent_corpus if isinstance(latent_corpus, (list, tuple)) else [latent_corpus]
    mats = [s.frames if isinstance(s, LatentSequence) else check_matrix(s, "latents") for s in seqs]
    if not mats:
        raise ValueError("empty latent corpus")
    dim = mats[0].shape[1]
    for m in mats[1:]:
        check_same_dim(dim, m.shape[1], "latent corpus")
    return np.vstack(mats)


def _with_zero_codeword(codebook: Codebook) -> Codebook:
    extended = np.vstack([codebook.codewords, np.zeros((1, codebook.dim))])
    return Codebook(codewords=extended, distortions=codebook.distortions)


def train_codebooks(latent_corpus, n_stages: int, n_codewords: int, seed: int,
                    max_iters: int = 100, variance_mode: str = "variance",
                    zero_codeword: bool = False, restarts: int = 1,
                    trained_on: str = "") -> RvqModel:
    """Train the stage cascade on a latent corpus.

    Stage 1 is k-means over all frames; each subsequent stage is k-means
    over the residuals left by the stages before it. Per-stage seeds are
    derived deterministically from ``seed``, so identical inputs yield a
    bit-identical model. With ``zero_codeword`` the zero vector is appended
    to every stage codebook (making each stage hold ``n_codewords`` + 1
    entries), which guarantees per-frame residual norms never increase.
    """
    check_positive_int(n_stages, "n_stages")
    check_mode(variance_mode)
    frames = _corpus_frames(latent_corpus)
    stage_seeds = np.random.SeedSequence(int(seed)).generate_state(n_stages, np.uint32)

    residual = frames
    stages: list[Codebook] = []
    for k in range(n_stages):
        codebook = kmeans(residual, n_codewords, int(stage_seeds[k]),
                          max_iters=max_iters, restarts=restarts)
        if zero_codeword:
            codebook = _with_zero_codeword(codebook)
        stages.append(codebook)
        codes = _nearest_codes(residual, codebook.codewords)
        residual = residual - codebook.codewords[codes]
    return RvqModel(
        stages=tuple(stages),
        variance_mode=variance_mode,
        zero_codeword=zero_codeword,
        trained_on=trained_on,
    )


def quantize(model: RvqModel, latents) -> QuantizationTrace:
    """Run the residual cascade over a latent sequence.

    Per frame and stage the nearest codeword (squared Euclidean distance,
    ties to the lowest index) is subtracted from the running residual.
    """
    frames = latents.frames if isinstance(latents, LatentSequence) else check_matrix(latents, "latents")
    check_same_dim(frames.shape[1], model.dim, "quantize")

    n_stages = model.n_stages
    residuals = np.empty((n_stages + 1,) + frames.shape)
    residuals[0] = frames
    codes = np.empty((n_stages, frames.shape[0]), dtype=np.int64)
    for k, codebook in enumerate(model.stages):
        codes[k] = _nearest_codes(residuals[k], codebook.codewords)
        residuals[k + 1] = residuals[k] - codebook.codewords[codes[k]]
    sigma = tuple(mean_frame_sigma(residuals[k], model.variance_mode)
                  for k in range(n_stages + 1))
    return QuantizationTrace(
        residuals=residuals,
        codes=codes,
        stage_sigma=sigma,
        variance_mode=model.variance_mode,
    )


def trace_from_stage_outputs(latents, stage_outputs,
                             variance_mode: str = "variance") -> QuantizationTrace:
    """Build a trace from externally produced per-stage quantizer outputs.

    ``stage_outputs`` are the ordered q_1..q_K tensors of an external
    codec; residuals follow from the cascade recurrence. Code indices are
    unknown for external stages, so ``codes`` is None.
    """
    check_mode(variance_mode)
    frames = latents.frames if isinstance(latents, LatentSequence) else check_matrix(latents, "latents")
    outputs = [check_matrix(q, "stage output") for q in stage_outputs]
    for q in outputs:
        if q.shape != frames.shape:
            raise DimensionMismatch(
                f"stage output shape {q.shape} does not match latents {frames.shape}"
            )
    residuals = np.empty((len(outputs) + 1,) + frames.shape)
    residuals[0] = frames
    for k, q in enumerate(outputs):
        residuals[k + 1] = residuals[k] - q
    sigma = tuple(mean_frame_sigma(residuals[k], variance_mode)
                  for k in range(len(outputs) + 1))
    return QuantizationTrace(
        residuals=residuals, codes=None, stage_sigma=sigma, variance_mode=variance_mode
    )


def save_model(model: RvqModel, path) -> None:
    """Write a model as an RVQM file (bit-exact round trip of codewords)."""
    sizes = {cb.size for cb in model.stages}
    if len(sizes) != 1:
        raise ValueError("RVQM requires every stage to hold the same codeword count")
    n = sizes.pop()
    out = bytearray()
    out += RVQM_MAGIC
    out += struct.pack("<IIII", RVQM_VERSION, model.n_stages, model.dim, n)
    out += struct.pack("<BB", 1 if model.variance_mode == "power" else 0,
                       1 if model.zero_codeword else 0)
    for codebook in model.stages:
        out += codebook.codewords.astype("<f4").tobytes()
    Path(path).write_bytes(bytes(out))


def load_model(path) -> RvqModel:
    """Read an RVQM file written by :func:`save_model`."""
    data = Path(path).read_bytes()
    if len(data) < 4 or data[:4] != RVQM_MAGIC:
        raise BadMagic(f"{path}: not an RVQM file")
    if len(data) < 22:
        raise TruncatedFile(f"{path}: header truncated")
    version, n_stages, dim, n = struct.unpack_from("<IIII", data, 4)
    mode_flag, zero_flag = struct.unpack_from("<BB", data, 20)
    if version != RVQM_VERSION:
        raise VersionUnsupported(f"{path}: RVQM version {version} not supported")
    if n_stages < 1 or dim < 1 or n < 1:
        raise TruncatedFile(f"{path}: invalid header fields")
    expected = 22 + n_stages * n * dim * 4
    if len(data) < expected:
        raise TruncatedFile(f"{path}: expected {expected} bytes, got {len(data)}")

    stages = []
    pos = 22
    for _ in range(n_stages):
        block = np.frombuffer(data, dtype="<f4", count=n * dim, offset=pos)
        stages.append(Codebook(codewords=block.reshape(n, dim).astype(np.float64)))
        pos += n * dim * 4
    return RvqModel(
        stages=tuple(stages),
        variance_mode="power" if mode_flag else "variance",
        zero_codeword=bool(zero_flag),
    )


class ResidualQuantizer(TransformerMixin, BaseEstimator):
    """sklearn-style front end for training and running the cascade.

    ``fit`` accepts an (M, D) frame matrix or a list of latent sequences;
    ``transform`` returns the quantized approximation (the sum of stage
    outputs) of each frame; ``predict`` returns per-frame code indices,
    shape (T, K); ``score`` returns the mean stage ratio, higher for input
    closer to the trained codebooks.
    """

    def __init__(self, n_stages=8, codebook_size=256, max_iters=100,
                 random_state=0, variance_mode="variance", zero_codeword=False,
                 restarts=1):
        self.n_stages = n_stages
        self.codebook_size = codebook_size
        self.max_iters = max_iters
        self.random_state = random_state
        self.variance_mode = variance_mode
        self.zero_codeword = zero_codeword
        self.restarts = restarts

    def fit(self, X, y=None):
        self.model_ = train_codebooks(
            X,
            n_stages=self.n_stages,
            n_codewords=self.codebook_size,
            seed=self.random_state,
            max_iters=self.max_iters,
            variance_mode=self.variance_mode,
            zero_codeword=self.zero_codeword,
            restarts=self.restarts,
        )
        return self

    def _check_fitted(self) -> RvqModel:
        if not hasattr(self, "model_"):
            raise RuntimeError("ResidualQuantizer is not fitted yet")
        return self.model_

    def quantize_trace(self, X) -> QuantizationTrace:
        return quantize(self._check_fitted(), X)

    def transform(self, X) -> np.ndarray:
        trace = self.quantize_trace(X)
        return trace.residuals[0] - trace.residuals[-1]

    def predict(self, X) -> np.ndarray:
        return self.quantize_trace(X).codes.T

    def score(self, X, y=None) -> float:
        from .lqr import lqr_report

        return lqr_report(self.quantize_trace(X)).mean_lqr
