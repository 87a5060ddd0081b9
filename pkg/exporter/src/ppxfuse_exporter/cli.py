"""CLI: export classifier logits from a checkpoint into ppxfuse files."""

from __future__ import annotations

import argparse
import sys
from collections.abc import Sequence

from .exporter import ExportJob, ExporterError, export


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppxfuse-export",
        description="Run a pretrained sequence classifier over a JSONL corpus "
                    "and write a ppxfuse manifest + logits rows pair.",
    )
    parser.add_argument("--checkpoint", required=True,
                        help="hub identifier or local checkpoint path")
    parser.add_argument("--corpus", required=True, help="JSONL corpus with id and text")
    parser.add_argument("--out", required=True,
                        help="output prefix; writes <out>.manifest.json and <out>.rows.jsonl")
    parser.add_argument("--batch-plan", default=None,
                        help="ppxfuse batch-plan file driving the inference batch order")
    parser.add_argument("--max-length", type=int, default=512)
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--name", default=None,
                        help="model_name for the manifest (default: checkpoint basename)")
    parser.add_argument("--labels", nargs="+", default=None, metavar="LABEL",
                        help="expected class names; export fails if the count mismatches")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    job = ExportJob(
        checkpoint_id=args.checkpoint,
        corpus_path=args.corpus,
        out_prefix=args.out,
        max_length=args.max_length,
        batch_size=args.batch_size,
        device=args.device,
        model_name=args.name,
        expected_labels=tuple(args.labels) if args.labels else None,
        batch_plan_path=args.batch_plan,
    )
    try:
        manifest_path, rows_path = export(job)
    except ExporterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"exported {rows_path} with manifest {manifest_path}")
    return 0
