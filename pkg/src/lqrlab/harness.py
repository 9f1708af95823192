"""Corpus evaluation: score a manifest of items, correlate against labels.

The manifest is a CSV with a header row. The column ``path`` is required
and points at a WAV file or an LTNT latent container. ``item``,
``system``, and ``reference`` are optional identity and pairing columns;
every other column must be numeric and is treated as a subjective score
column. Reports carry one row per (score column, metric) pair.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import lqr, ltnt, rvq, stats
from .audio_io import load_wav
from .encoder import EncoderConfig
from .exceptions import (
    BadRow,
    DegenerateVariance,
    EmptyManifest,
    IoFailure,
    LqrLabError,
    MissingPathColumn,
    TooFewPoints,
)

_IDENTITY_COLUMNS = ("path", "item", "system", "reference")

METRIC_MEAN = "mean_lqr"
METRIC_FINAL = "input_to_final"
METRIC_SNR = "snr_baseline"


@dataclass(frozen=True)
class ManifestEntry:
    """One manifest row: where the media lives and how it was rated."""

    media_path: str
    item_id: str
    system_id: str | None = None
    reference_path: str | None = None
    scores: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class StatRow:
    """Correlations of one score column against one objective metric."""

    score_column: str
    metric: str
    n: int
    pearson_rho: float | None
    spearman_tau: float | None
    note: str = ""


@dataclass(frozen=True)
class CorrelationReport:
    rows: tuple[StatRow, ...]
    aggregation: str
    n_items: int
    n_failed: int
    exclusions: tuple[tuple[str, str], ...]
    config: dict

    @property
    def failure_fraction(self) -> float:
        return self.n_failed / self.n_items if self.n_items else 0.0


def load_manifest(path, require_scores: bool = True) -> list[ManifestEntry]:
    """Parse a manifest CSV.

    Row numbers in errors are file line numbers (the header is line 1).
    With ``require_scores`` the header must contain at least one score
    column; training manifests pass False and may list bare paths.
    """
    try:
        with open(path, newline="") as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames is None:
                raise EmptyManifest(f"{path}: no header row")
            fieldnames = [name.strip() for name in reader.fieldnames]
            if "path" not in fieldnames:
                raise MissingPathColumn(f"{path}: manifest header has no `path` column")
            score_columns = [c for c in fieldnames if c not in _IDENTITY_COLUMNS]
            if require_scores and not score_columns:
                raise EmptyManifest(f"{path}: manifest has no score columns")

            entries: list[ManifestEntry] = []
            for row_no, row in enumerate(reader, start=2):
                cells = {k.strip(): (v or "").strip() for k, v in row.items() if k}
                media = cells.get("path", "")
                if not media:
                    raise BadRow(row_no, "empty `path` cell")
                scores: dict[str, float] = {}
                for column in score_columns:
                    raw = cells.get(column, "")
                    try:
                        value = float(raw)
                    except ValueError:
                        raise BadRow(row_no, f"column {column!r}: cannot parse {raw!r}") from None
                    scores[column] = value
                entries.append(ManifestEntry(
                    media_path=media,
                    item_id=cells.get("item") or media,
                    system_id=cells.get("system") or None,
                    reference_path=cells.get("reference") or None,
                    scores=scores,
                ))
    except OSError as exc:
        raise IoFailure(f"cannot read manifest {path}: {exc}") from exc
    if not entries:
        raise EmptyManifest(f"{path}: manifest has no data rows")
    return entries


def score_media(path, model: rvq.RvqModel, cfg: EncoderConfig) -> lqr.LqrReport:
    """Score one media file, routed by extension.

    WAV files go through the spectral encoder and the model's cascade.
    LTNT files that carry stage outputs are scored from those outputs
    directly (the model only supplies the variance mode); LTNT files with
    latents alone are quantized with the model.
    """
    if str(path).lower().endswith(".ltnt"):
        container = ltnt.load_latents(path)
        if container.stage_outputs:
            trace = rvq.trace_from_stage_outputs(
                container.latents, container.stage_outputs, model.variance_mode
            )
        else:
            trace = rvq.quantize(model, container.latents)
        return lqr.lqr_report(trace)
    return lqr.score_clip(model, cfg, load_wav(path))


def _score_entry(entry: ManifestEntry, model, cfg) -> dict[str, float]:
    report = score_media(entry.media_path, model, cfg)
    metrics = {METRIC_MEAN: report.mean_lqr, METRIC_FINAL: report.input_to_final}
    if entry.reference_path:
        metrics[METRIC_SNR] = stats.snr_baseline(
            load_wav(entry.reference_path), load_wav(entry.media_path)
        )
    return metrics


def _correlate(column: str, metric: str, pairs: list[tuple[float, float]]) -> StatRow:
    # snr_baseline returns an infinite sentinel for identical signals;
    # such pairs carry no gradable degradation and are left out.
    pairs = [p for p in pairs if math.isfinite(p[0]) and math.isfinite(p[1])]
    objective = [p[0] for p in pairs]
    subjective = [p[1] for p in pairs]
    try:
        rho = stats.pearson(objective, subjective)
        tau = stats.spearman(objective, subjective)
    except (DegenerateVariance, TooFewPoints) as exc:
        return StatRow(column, metric, len(pairs), None, None,
                       note=type(exc).__name__)
    return StatRow(column, metric, len(pairs), rho, tau)


def evaluate(manifest: list[ManifestEntry], model: rvq.RvqModel, cfg: EncoderConfig,
             aggregation: str = "per_item", jobs: int = 1) -> CorrelationReport:
    """Score every manifest item and correlate metrics with score columns.

    Item failures are isolated: a failing item is excluded and listed in
    the report, and only an all-items failure raises. ``per_system``
    averages objective and subjective values within each system before
    correlating (items without a system id form their own group). Items
    are sorted by item id before the reduction, so results do not depend
    on manifest order or on ``jobs``.
    """
    if aggregation not in ("per_item", "per_system"):
        raise ValueError(f"aggregation must be per_item or per_system, got {aggregation!r}")
    entries = sorted(manifest, key=lambda e: e.item_id)

    def attempt(entry: ManifestEntry):
        try:
            return _score_entry(entry, model, cfg)
        except (LqrLabError, OSError, ValueError) as exc:
            return exc

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(attempt, entries))
    else:
        outcomes = [attempt(entry) for entry in entries]

    scored: list[tuple[ManifestEntry, dict[str, float]]] = []
    exclusions: list[tuple[str, str]] = []
    for entry, outcome in zip(entries, outcomes):
        if isinstance(outcome, Exception):
            exclusions.append((entry.item_id, f"{type(outcome).__name__}: {outcome}"))
        else:
            scored.append((entry, outcome))
    if not scored:
        raise IoFailure(
            "every manifest item failed: "
            + "; ".join(f"{item}: {reason}" for item, reason in exclusions[:5])
        )

    if aggregation == "per_system":
        groups: dict[str, list[tuple[ManifestEntry, dict[str, float]]]] = {}
        for entry, metrics in scored:
            groups.setdefault(entry.system_id or entry.item_id, []).append((entry, metrics))
        reduced = []
        for system_id in sorted(groups):
            members = groups[system_id]
            metrics = {}
            for name in (METRIC_MEAN, METRIC_FINAL, METRIC_SNR):
                values = [m[name] for _, m in members if name in m]
                if len(values) == len(members):
                    metrics[name] = sum(values) / len(values)
            scores = {}
            for column in members[0][0].scores:
                values = [e.scores[column] for e, _ in members if column in e.scores]
                scores[column] = sum(values) / len(values)
            reduced.append((scores, metrics))
    else:
        reduced = [(entry.scores, metrics) for entry, metrics in scored]

    score_columns = sorted({column for scores, _ in reduced for column in scores})
    rows: list[StatRow] = []
    for column in score_columns:
        for metric in (METRIC_MEAN, METRIC_FINAL, METRIC_SNR):
            pairs = [
                (metrics[metric], scores[column])
                for scores, metrics in reduced
                if metric in metrics and column in scores
            ]
            if metric == METRIC_SNR and not pairs:
                continue  # no references given, metric not applicable
            rows.append(_correlate(column, metric, pairs))

    return CorrelationReport(
        rows=tuple(rows),
        aggregation=aggregation,
        n_items=len(entries),
        n_failed=len(exclusions),
        exclusions=tuple(exclusions),
        config={
            "aggregation": aggregation,
            "n_stages": model.n_stages,
            "codebook_size": model.codebook_size,
            "variance_mode": model.variance_mode,
            "zero_codeword": model.zero_codeword,
            "trained_on": model.trained_on,
            "encoder": {
                "frame_len": cfg.frame_len,
                "hop": cfg.hop,
                "n_bands": cfg.n_bands,
                "sample_rate": cfg.sample_rate,
                "log_floor": cfg.log_floor,
            },
        },
    )


def _format_number(value: float | None) -> str:
    return "" if value is None else f"{value:.6g}"


def write_report(report: CorrelationReport, path, format: str = "csv") -> None:
    """Write a report as plain CSV rows or as a structured JSON document.

    CSV column order is fixed (score_column, metric, n, pearson_rho,
    spearman_tau) and numbers carry 6 significant digits; the structured
    format additionally embeds the config echo and the exclusion log.
    """
    if format not in ("csv", "structured"):
        raise ValueError(f"format must be csv or structured, got {format!r}")
    try:
        if format == "csv":
            with open(path, "w", newline="") as handle:
                writer = csv.writer(handle)
                writer.writerow(["score_column", "metric", "n", "pearson_rho", "spearman_tau"])
                for row in report.rows:
                    writer.writerow([
                        row.score_column, row.metric, row.n,
                        _format_number(row.pearson_rho),
                        _format_number(row.spearman_tau),
                    ])
        else:
            document = {
                "aggregation": report.aggregation,
                "n_items": report.n_items,
                "n_failed": report.n_failed,
                "rows": [
                    {
                        "score_column": row.score_column,
                        "metric": row.metric,
                        "n": row.n,
                        "pearson_rho": row.pearson_rho,
                        "spearman_tau": row.spearman_tau,
                        "note": row.note,
                    }
                    for row in report.rows
                ],
                "exclusions": [
                    {"item": item, "reason": reason} for item, reason in report.exclusions
                ],
                "config": report.config,
            }
            Path(path).write_text(json.dumps(document, indent=2) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write report {path}: {exc}") from exc
