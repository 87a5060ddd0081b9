"""Run a pretrained sequence classifier over a JSONL corpus and export logits.

The output pair (manifest JSON + rows JSONL) follows the ppxfuse interchange
format exactly; this module talks to the fusion toolkit only through those
files.  Inference runs in eval mode with no gradients, so exports are
deterministic on a fixed device, and attention masking keeps per-example
logits batch-size-invariant up to float accumulation noise.
"""

from __future__ import annotations

import datetime
import json
import math
from dataclasses import dataclass
from pathlib import Path

import torch
from transformers import AutoModelForSequenceClassification, AutoTokenizer


class ExporterError(Exception):
    """Base error for export failures."""


class ConfigError(ExporterError):
    """Invalid job configuration or incompatible checkpoint."""


class CorpusError(ExporterError):
    """Corpus or batch-plan file rejected."""


@dataclass(frozen=True)
class ExportJob:
    """One export run: checkpoint, corpus, output prefix, batching knobs."""

    checkpoint_id: str
    corpus_path: str | Path
    out_prefix: str | Path
    max_length: int = 512
    batch_size: int = 16
    device: str = "cpu"
    model_name: str | None = None
    expected_labels: tuple[str, ...] | None = None
    batch_plan_path: str | Path | None = None

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_length < 8:
            raise ConfigError(f"max_length must be >= 8, got {self.max_length}")

    @property
    def resolved_model_name(self) -> str:
        return self.model_name or Path(str(self.checkpoint_id)).name


def read_corpus_texts(path: str | Path) -> list[tuple[str, str]]:
    """(id, text) pairs from a JSONL corpus; duplicates and bad lines rejected."""
    pairs: list[tuple[str, str]] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {line_number}: malformed JSON ({exc.msg})") from None
            if not isinstance(row, dict):
                raise CorpusError(f"line {line_number}: expected a JSON object")
            example_id = row.get("id")
            text = row.get("text")
            if not isinstance(example_id, str) or not example_id:
                raise CorpusError(f"line {line_number}: missing or empty id")
            if not isinstance(text, str):
                raise CorpusError(f"line {line_number}: id {example_id!r} has no text")
            if example_id in seen:
                raise CorpusError(
                    f"duplicate id {example_id!r} on lines {seen[example_id]} and {line_number}"
                )
            seen[example_id] = line_number
            pairs.append((example_id, text))
    if not pairs:
        raise CorpusError(f"corpus {path} is empty")
    return pairs


def read_batch_plan_ids(path: str | Path) -> list[list[str]]:
    """Batch id lists from a ppxfuse batch-plan file (arrays, then a summary)."""
    batches: list[list[str]] = []
    with open(path, encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            try:
                parsed = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {line_number}: malformed JSON ({exc.msg})") from None
            if isinstance(parsed, list):
                if not all(isinstance(i, str) for i in parsed):
                    raise CorpusError(f"line {line_number}: batch must be a list of id strings")
                batches.append(parsed)
            elif isinstance(parsed, dict):
                break  # summary line ends the batch list
            else:
                raise CorpusError(f"line {line_number}: expected an array or the summary object")
    if not batches:
        raise CorpusError(f"batch plan {path} lists no batches")
    return batches


def _format_float(value: float) -> str:
    if not math.isfinite(value):
        raise ExporterError(f"model produced a non-finite logit {value!r}")
    return format(value, ".17g")


def _utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def export(job: ExportJob) -> tuple[Path, Path]:
    """Export one logits row per corpus record; returns (manifest, rows) paths.

    Rows are written in corpus order no matter how examples were batched.
    When a batch plan is supplied its id groups drive the compute order,
    demonstrating length-sorted inference batching on real models.
    """
    pairs = read_corpus_texts(job.corpus_path)
    texts = dict(pairs)
    order = [example_id for example_id, _ in pairs]

    if job.batch_plan_path is not None:
        batches = read_batch_plan_ids(job.batch_plan_path)
        planned = [example_id for batch in batches for example_id in batch]
        if sorted(planned) != sorted(order):
            raise CorpusError(
                "batch plan ids do not partition the corpus "
                f"({len(planned)} planned vs {len(order)} records)"
            )
    else:
        batches = [
            order[start : start + job.batch_size]
            for start in range(0, len(order), job.batch_size)
        ]

    tokenizer = AutoTokenizer.from_pretrained(job.checkpoint_id)
    model = AutoModelForSequenceClassification.from_pretrained(job.checkpoint_id)
    device = torch.device(job.device)
    model.to(device)
    model.eval()

    n_labels = int(model.config.num_labels)
    if n_labels < 2:
        raise ConfigError(
            f"checkpoint {job.checkpoint_id!r} has {n_labels} label(s); need a classifier"
        )
    id2label = model.config.id2label or {}
    label_order = [str(id2label.get(i, f"LABEL_{i}")) for i in range(n_labels)]
    if job.expected_labels is not None and len(job.expected_labels) != n_labels:
        raise ConfigError(
            f"checkpoint emits {n_labels} classes but {len(job.expected_labels)} "
            f"labels were requested: {list(job.expected_labels)}"
        )

    logits_by_id: dict[str, list[float]] = {}
    try:
        with torch.no_grad():
            for batch_ids in batches:
                encoded = tokenizer(
                    [texts[example_id] for example_id in batch_ids],
                    padding=True,
                    truncation=True,
                    max_length=job.max_length,
                    return_tensors="pt",
                ).to(device)
                logits = model(**encoded).logits.to(torch.float64).cpu()
                for row, example_id in enumerate(batch_ids):
                    logits_by_id[example_id] = [float(v) for v in logits[row]]
    except torch.cuda.OutOfMemoryError as exc:
        raise ExporterError(
            f"out of memory at batch_size={job.batch_size}; retry with a smaller --batch-size"
        ) from exc
    except RuntimeError as exc:
        if "out of memory" in str(exc).lower():
            raise ExporterError(
                f"out of memory at batch_size={job.batch_size}; retry with a smaller --batch-size"
            ) from exc
        raise

    prefix = Path(str(job.out_prefix))
    manifest_path = prefix.with_name(prefix.name + ".manifest.json")
    rows_path = prefix.with_name(prefix.name + ".rows.jsonl")
    manifest = {
        "model_name": job.resolved_model_name,
        "label_order": label_order,
        "n_rows": len(order),
        "source_checkpoint": str(job.checkpoint_id),
        "created_at": _utc_now(),
    }
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(json.dumps(manifest, ensure_ascii=False) + "\n")
    with open(rows_path, "w", encoding="utf-8", newline="\n") as handle:
        for example_id in order:
            values = ",".join(_format_float(v) for v in logits_by_id[example_id])
            handle.write(f'{{"id":{json.dumps(example_id, ensure_ascii=False)},"logits":[{values}]}}\n')
    return manifest_path, rows_path
