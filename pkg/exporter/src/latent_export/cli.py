"""Command line front end for the exporter."""

from __future__ import annotations

import argparse
import sys

from .codecs import REGISTRY
from .errors import ExportError
from .export import ExportSpec, export


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latent-export",
        description="Run a pre-trained audio codec and write its latents "
                    "and per-stage quantizer outputs to LTNT containers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_export = sub.add_parser("export", help="export one or more WAV files")
    p_export.add_argument("--codec", required=True, choices=sorted(REGISTRY))
    p_export.add_argument("--input", action="append", required=True,
                          help="WAV file; repeat for batch mode")
    p_export.add_argument("--output", action="append", required=True,
                          help="LTNT file, one per --input")
    p_export.add_argument("--max-stages", type=int, default=None,
                          help="cap the number of exported quantizer stages")
    p_export.add_argument("--checkpoint", default=None,
                          help="local checkpoint directory overriding the registry")

    sub.add_parser("codecs", help="list registered codec ids")
    return parser


def _cmd_export(args) -> int:
    if len(args.input) != len(args.output):
        raise ValueError(
            f"{len(args.input)} inputs but {len(args.output)} outputs; "
            f"pass one --output per --input"
        )
    for wav, out in zip(args.input, args.output):
        result = export(ExportSpec(
            codec_id=args.codec,
            input=wav,
            output=out,
            max_stages=args.max_stages,
            checkpoint=args.checkpoint,
        ))
        print(f"wrote {result.output}: {result.n_stages} stages x "
              f"{result.n_frames} frames x {result.dim} dims "
              f"(residual check {result.residual_error:.3g})")
    return 0


def _cmd_codecs() -> int:
    for codec_id in sorted(REGISTRY):
        entry = REGISTRY[codec_id]
        print(f"{codec_id}\t{entry.family}\t{entry.checkpoint}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "codecs":
            return _cmd_codecs()
        return _cmd_export(args)
    except (ExportError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
