"""Command-line front end: train, score, eval, degrade, export-info."""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import degrade as degrade_mod
from . import harness, lqr, ltnt, rvq
from .audio_io import load_wav, save_wav
from .encoder import EncoderConfig, encode_spectral
from .exceptions import LqrLabError

log = logging.getLogger("lqrlab")


def _configure_logging() -> None:
    level_name = os.environ.get("LQRLAB_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _encoder_config(args) -> EncoderConfig:
    return EncoderConfig(
        frame_len=args.frame,
        hop=args.hop,
        n_bands=args.bands,
        sample_rate=args.sample_rate,
    )


def _load_training_latents(manifest_path: str, cfg: EncoderConfig) -> list:
    entries = harness.load_manifest(manifest_path, require_scores=False)
    corpus = []
    for entry in entries:
        if entry.media_path.lower().endswith(".ltnt"):
            corpus.append(ltnt.load_latents(entry.media_path).latents)
        else:
            corpus.append(encode_spectral(load_wav(entry.media_path), cfg))
        log.info("ingested %s", entry.media_path)
    return corpus


def _write_json(path: Path, document: dict) -> None:
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n")


def _cmd_train(args) -> int:
    cfg = _encoder_config(args)
    corpus = _load_training_latents(args.manifest, cfg)
    model = rvq.train_codebooks(
        corpus,
        n_stages=args.stages,
        n_codewords=args.codebook_size,
        seed=args.seed,
        max_iters=args.max_iters,
        variance_mode=args.variance_mode,
        zero_codeword=args.zero_codeword,
        restarts=args.restarts,
        trained_on=args.manifest,
    )
    rvq.save_model(model, args.out)
    config_echo = {
        "command": "train",
        "manifest": args.manifest,
        "stages": args.stages,
        "codebook_size": args.codebook_size,
        "stored_codebook_size": model.codebook_size,
        "variance_mode": args.variance_mode,
        "zero_codeword": args.zero_codeword,
        "max_iters": args.max_iters,
        "restarts": args.restarts,
        "seed": args.seed,
        "encoder": {
            "frame_len": cfg.frame_len,
            "hop": cfg.hop,
            "n_bands": cfg.n_bands,
            "sample_rate": cfg.sample_rate,
            "log_floor": cfg.log_floor,
        },
        "out": str(args.out),
    }
    _write_json(Path(str(args.out) + ".meta.json"), config_echo)
    print(f"trained {model.n_stages} stages x {model.codebook_size} codewords "
          f"(dim {model.dim}) -> {args.out}")
    return 0


def _cmd_score(args) -> int:
    model = rvq.load_model(args.model)
    cfg = _encoder_config(args)
    report = harness.score_media(args.input, model, cfg)
    if args.json:
        document = report.to_dict()
        document["input"] = str(args.input)
        document["model"] = str(args.model)
        print(json.dumps(document, indent=2, sort_keys=True))
    else:
        print(report.as_text(db=args.db))
    return 0


def _cmd_eval(args) -> int:
    model = rvq.load_model(args.model)
    cfg = _encoder_config(args)
    manifest = harness.load_manifest(args.manifest)
    report = harness.evaluate(manifest, model, cfg,
                              aggregation=args.aggregation, jobs=args.jobs)
    harness.write_report(report, args.out, format=args.format)
    meta = {
        "command": "eval",
        "model": str(args.model),
        "manifest": str(args.manifest),
        "aggregation": args.aggregation,
        "jobs": args.jobs,
        "format": args.format,
        "n_items": report.n_items,
        "n_failed": report.n_failed,
        "exclusions": [{"item": i, "reason": r} for i, r in report.exclusions],
        "config": report.config,
    }
    _write_json(Path(str(args.out) + ".meta.json"), meta)
    for item, reason in report.exclusions:
        log.warning("excluded %s: %s", item, reason)
    print(f"wrote {args.out}: {len(report.rows)} correlation rows, "
          f"{report.n_failed}/{report.n_items} items excluded")
    if report.failure_fraction > 0.5:
        print("more than half of the manifest items failed", file=sys.stderr)
        return 1
    return 0


_KIND_ALIASES = {
    "noise": degrade_mod.ADDITIVE_NOISE,
    "clip": degrade_mod.PEAK_CLIP,
    "lowpass": degrade_mod.LOWPASS,
}


def _cmd_degrade(args) -> int:
    clip = load_wav(args.input)
    spec = degrade_mod.DegradationSpec(
        kind=_KIND_ALIASES[args.kind],
        snr_db=math.inf if args.snr is None else args.snr,
        noise_kind=args.noise_kind,
        threshold=args.threshold,
        cutoff=args.cutoff,
        seed=args.seed,
    )
    outcome = degrade_mod.apply_degradation(clip, spec)
    save_wav(outcome.clip, args.out)
    lines = [
        f"input {args.input}",
        f"kind {spec.kind}",
        f"seed {spec.seed}",
        f"peak_scale {outcome.peak_scale:.9g}",
    ]
    if spec.kind == degrade_mod.ADDITIVE_NOISE:
        lines.append(f"noise_kind {spec.noise_kind}")
        lines.append(f"snr_db {spec.snr_db:.9g}")
        realized = outcome.realized_snr_db
        lines.append(f"realized_snr_db {realized:.9g}" if realized is not None
                     else "realized_snr_db nan")
    elif spec.kind == degrade_mod.PEAK_CLIP:
        lines.append(f"threshold {spec.threshold:.9g}")
    else:
        lines.append(f"cutoff {spec.cutoff:.9g}")
    Path(str(args.out) + ".meta.txt").write_text("\n".join(lines) + "\n")
    print(f"wrote {args.out} ({spec.describe()})")
    return 0


def _describe_ltnt(path: str) -> dict:
    container = ltnt.load_latents(path)
    return {
        "format": "ltnt",
        "path": path,
        "frames": len(container.latents),
        "dim": container.latents.dim,
        "sample_rate": container.sample_rate,
        "hop": container.hop,
        "frame_rate": container.latents.frame_rate,
        "n_stages": container.n_stages,
    }


def _describe_rvqm(path: str) -> dict:
    model = rvq.load_model(path)
    return {
        "format": "rvqm",
        "path": path,
        "n_stages": model.n_stages,
        "codebook_size": model.codebook_size,
        "dim": model.dim,
        "variance_mode": model.variance_mode,
        "zero_codeword": model.zero_codeword,
    }


def _cmd_export_info(args) -> int:
    path = str(args.input)
    if path.lower().endswith(".rvqm"):
        document = _describe_rvqm(path)
    else:
        document = _describe_ltnt(path)
    if args.json:
        print(json.dumps(document, indent=2, sort_keys=True))
    else:
        for key, value in document.items():
            print(f"{key} {value}")
    return 0


def _add_encoder_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--bands", type=int, default=32,
                        help="latent dimensions per frame (default 32)")
    parser.add_argument("--frame", type=int, default=1024,
                        help="analysis frame length in samples (default 1024)")
    parser.add_argument("--hop", type=int, default=256,
                        help="hop between frames in samples (default 256)")
    parser.add_argument("--sample-rate", type=int, default=16000,
                        help="expected input sample rate (default 16000)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lqrlab",
        description="Train residual codebooks on audio latents and score "
                    "signal quality by per-stage error ratios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train stage codebooks from a manifest")
    p_train.add_argument("--manifest", required=True, help="CSV with a `path` column")
    p_train.add_argument("--stages", type=int, default=8)
    p_train.add_argument("--codebook-size", type=int, default=256)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--max-iters", type=int, default=100)
    p_train.add_argument("--restarts", type=int, default=1)
    p_train.add_argument("--variance-mode", choices=["variance", "power"],
                         default="variance")
    p_train.add_argument("--zero-codeword", action="store_true",
                         help="append the zero vector to every stage codebook")
    p_train.add_argument("--out", required=True, help="output model file (.rvqm)")
    _add_encoder_flags(p_train)
    p_train.set_defaults(handler=_cmd_train)

    p_score = sub.add_parser("score", help="score one WAV or LTNT file")
    p_score.add_argument("--model", required=True)
    p_score.add_argument("--input", required=True, help="WAV or LTNT file")
    p_score.add_argument("--db", action="store_true", help="print ratios in dB")
    p_score.add_argument("--json", action="store_true")
    _add_encoder_flags(p_score)
    p_score.set_defaults(handler=_cmd_score)

    p_eval = sub.add_parser("eval", help="score a manifest and correlate")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--manifest", required=True)
    p_eval.add_argument("--aggregation", choices=["per_item", "per_system"],
                        default="per_item")
    p_eval.add_argument("--jobs", type=int, default=1)
    p_eval.add_argument("--format", choices=["csv", "structured"], default="csv")
    p_eval.add_argument("--out", required=True)
    _add_encoder_flags(p_eval)
    p_eval.set_defaults(handler=_cmd_eval)

    p_degrade = sub.add_parser("degrade", help="apply a controlled degradation")
    p_degrade.add_argument("--input", required=True)
    p_degrade.add_argument("--kind", choices=sorted(_KIND_ALIASES), required=True)
    p_degrade.add_argument("--snr", type=float, default=None,
                           help="target SNR in dB (noise kind)")
    p_degrade.add_argument("--noise-kind", choices=["white", "pink"], default="white")
    p_degrade.add_argument("--threshold", type=float, default=1.0,
                           help="clamp amplitude (clip kind)")
    p_degrade.add_argument("--cutoff", type=float, default=1000.0,
                           help="cutoff in Hz (lowpass kind)")
    p_degrade.add_argument("--seed", type=int, default=0)
    p_degrade.add_argument("--out", required=True)
    p_degrade.set_defaults(handler=_cmd_degrade)

    p_info = sub.add_parser("export-info",
                            help="describe an LTNT or RVQM file")
    p_info.add_argument("--input", required=True)
    p_info.add_argument("--json", action="store_true")
    p_info.set_defaults(handler=_cmd_export_info)

    return parser


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (LqrLabError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
