"""Readers and writers for every interchange format.

Row-oriented data is JSONL (streamable, diff-friendly); configs and
manifests are single JSON documents.  All files are UTF-8 without BOM.
Floats are written with 17 significant digits so a write/read round trip is
lossless and byte-deterministic.  Readers reject invalid input rather than
repairing it, and carry line numbers plus offending ids in error messages.
"""

from __future__ import annotations

import json
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import CorpusRecord, LabelSpace, LogitBundle
from .dataset import BalancePlan, BatchPlan, LengthMetric
from .errors import (
    DomainError,
    ManifestError,
    ParseError,
    SchemaError,
    ValidationError,
)
from .fusion import FusionResult, FusionStrategy
from .weighting import WeightScheme, WeightVector

# Fixed timestamp written when no creation time is supplied, keeping
# generated manifests byte-identical across runs.
EPOCH_TIMESTAMP = "1970-01-01T00:00:00Z"


@dataclass(frozen=True, slots=True)
class BundleManifest:
    """Sidecar metadata fixing a logit file's model identity and label order."""

    model_name: str
    label_order: tuple[str, ...]
    n_rows: int
    source_checkpoint: str = ""
    created_at: str = EPOCH_TIMESTAMP


# ---------------------------------------------------------------------------
# Deterministic JSON encoding (17 significant digits for floats)
# ---------------------------------------------------------------------------

def _encode(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            raise DomainError(f"cannot serialize non-finite float {value!r}")
        return format(value, ".17g")
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, Mapping):
        items = (f"{_encode(str(k))}:{_encode(v)}" for k, v in value.items())
        return "{" + ",".join(items) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_encode(item) for item in value) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(value) -> str:
    """Compact deterministic JSON with lossless float formatting."""
    return _encode(value)


def _read_lines(path: str | Path) -> Iterable[tuple[int, str]]:
    with open(path, encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if line_number == 1 and line.startswith("﻿"):
                raise ParseError("byte-order mark not allowed (UTF-8 without BOM)", 1)
            yield line_number, line.rstrip("\n")


def _iter_jsonl(path: str | Path) -> Iterable[tuple[int, dict]]:
    for line_number, line in _read_lines(path):
        try:
            parsed = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON ({exc.msg})", line_number) from None
        if not isinstance(parsed, dict):
            raise ParseError("expected a JSON object", line_number)
        yield line_number, parsed


def _load_json(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    if text.startswith("﻿"):
        raise ParseError("byte-order mark not allowed (UTF-8 without BOM)", 1)
    try:
        parsed = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON ({exc.msg})", exc.lineno) from None
    if not isinstance(parsed, dict):
        raise ParseError(f"expected a JSON object in {path}")
    return parsed


def _write_text(path: str | Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def _require(obj: dict, key: str, kind: type, line_number: int | None = None, where: str = ""):
    if key not in obj:
        raise ValidationError(_at(f"missing required key {key!r}{where}", line_number))
    value = obj[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ValidationError(
            _at(f"key {key!r} must be {kind.__name__}, got {type(value).__name__}{where}", line_number)
        )
    return value


def _at(message: str, line_number: int | None) -> str:
    return f"line {line_number}: {message}" if line_number is not None else message


# ---------------------------------------------------------------------------
# Corpora
# ---------------------------------------------------------------------------

def read_corpus(path: str | Path, label_space: LabelSpace) -> list[CorpusRecord]:
    """Read a JSONL corpus; label strings are mapped to class indices."""
    records: list[CorpusRecord] = []
    seen: dict[str, int] = {}
    for line_number, row in _iter_jsonl(path):
        example_id = _require(row, "id", str, line_number)
        if example_id in seen:
            raise ValidationError(
                f"duplicate id {example_id!r} on lines {seen[example_id]} and {line_number}"
            )
        seen[example_id] = line_number
        label_name = row.get("label")
        label = None
        if label_name is not None:
            if not isinstance(label_name, str):
                raise ValidationError(_at("key 'label' must be a class name string", line_number))
            label = label_space.index_of(label_name)
        records.append(
            CorpusRecord(
                id=example_id,
                text=_require(row, "text", str, line_number),
                language=_require(row, "language", str, line_number),
                source=_require(row, "source", str, line_number),
                sub_source=row.get("sub_source", "") or "",
                model=row.get("model", "") or "",
                label=label,
            )
        )
    return records


def write_corpus(records: Sequence[CorpusRecord], path: str | Path, label_space: LabelSpace) -> None:
    lines = []
    for record in records:
        row: dict = {
            "id": record.id,
            "text": record.text,
            "language": record.language,
            "source": record.source,
        }
        if record.sub_source:
            row["sub_source"] = record.sub_source
        if record.model:
            row["model"] = record.model
        if record.label is not None:
            row["label"] = label_space.labels[record.label]
        lines.append(dumps(row))
    _write_text(path, "\n".join(lines) + "\n" if lines else "")


# ---------------------------------------------------------------------------
# Logit bundles (manifest JSON + rows JSONL)
# ---------------------------------------------------------------------------

def read_manifest(path: str | Path) -> BundleManifest:
    obj = _load_json(path)
    label_order = _require(obj, "label_order", list)
    if not all(isinstance(name, str) for name in label_order):
        raise ValidationError(f"manifest {path}: label_order must be a list of strings")
    return BundleManifest(
        model_name=_require(obj, "model_name", str),
        label_order=tuple(label_order),
        n_rows=_require(obj, "n_rows", int),
        source_checkpoint=obj.get("source_checkpoint", "") or "",
        created_at=obj.get("created_at", EPOCH_TIMESTAMP),
    )


def read_logits(manifest_path: str | Path, rows_path: str | Path) -> LogitBundle:
    """Read and validate a manifest + rows pair into a LogitBundle."""
    manifest = read_manifest(manifest_path)
    label_space = LabelSpace(manifest.label_order)
    n_classes = label_space.n_classes
    ids: list[str] = []
    seen: dict[str, int] = {}
    rows: list[list[float]] = []
    for line_number, row in _iter_jsonl(rows_path):
        example_id = _require(row, "id", str, line_number)
        if example_id in seen:
            raise ValidationError(
                f"duplicate id {example_id!r} on lines {seen[example_id]} and {line_number}"
            )
        seen[example_id] = line_number
        logits = _require(row, "logits", list, line_number)
        if len(logits) != n_classes:
            raise SchemaError(
                _at(f"id {example_id!r}: {len(logits)} logits for {n_classes} classes", line_number)
            )
        values = []
        for value in logits:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValidationError(
                    _at(f"id {example_id!r}: non-numeric logit {value!r}", line_number)
                )
            if not math.isfinite(value):
                raise ValidationError(
                    _at(f"id {example_id!r}: non-finite logit {value!r}", line_number)
                )
            values.append(float(value))
        ids.append(example_id)
        rows.append(values)
    if len(ids) != manifest.n_rows:
        raise ManifestError(
            f"manifest declares {manifest.n_rows} rows but {rows_path} has {len(ids)}"
        )
    values_array = np.array(rows, dtype=np.float64).reshape(len(ids), n_classes)
    return LogitBundle(manifest.model_name, label_space, tuple(ids), values_array)


def write_logits(
    bundle: LogitBundle,
    manifest_path: str | Path,
    rows_path: str | Path,
    source_checkpoint: str = "",
    created_at: str = EPOCH_TIMESTAMP,
) -> None:
    manifest = {
        "model_name": bundle.model_name,
        "label_order": list(bundle.label_space.labels),
        "n_rows": len(bundle),
        "source_checkpoint": source_checkpoint,
        "created_at": created_at,
    }
    _write_text(manifest_path, dumps(manifest) + "\n")
    lines = [
        dumps({"id": example_id, "logits": list(map(float, vector))})
        for example_id, vector in bundle.rows()
    ]
    _write_text(rows_path, "\n".join(lines) + "\n" if lines else "")


# ---------------------------------------------------------------------------
# Predictions
# ---------------------------------------------------------------------------

def write_predictions(result: FusionResult, path: str | Path) -> None:
    """One JSON object per line: id, predicted label, distribution, strategy."""
    if len(result) == 0:
        raise DomainError("refusing to write an empty prediction set")
    labels = result.label_space.labels
    lines = []
    for i, example_id in enumerate(result.ids):
        if result.probabilities is None:
            distribution = None
        else:
            distribution = {
                label: float(result.probabilities[i, c]) for c, label in enumerate(labels)
            }
        lines.append(
            dumps(
                {
                    "id": example_id,
                    "predicted_label": labels[int(result.predicted[i])],
                    "probabilities": distribution,
                    "strategy": result.strategy.value,
                }
            )
        )
    _write_text(path, "\n".join(lines) + "\n")


def read_predictions(path: str | Path, label_space: LabelSpace) -> FusionResult:
    ids: list[str] = []
    seen: dict[str, int] = {}
    predicted: list[int] = []
    prob_rows: list[list[float]] = []
    strategy: str | None = None
    has_probs: bool | None = None
    for line_number, row in _iter_jsonl(path):
        example_id = _require(row, "id", str, line_number)
        if example_id in seen:
            raise ValidationError(
                f"duplicate id {example_id!r} on lines {seen[example_id]} and {line_number}"
            )
        seen[example_id] = line_number
        row_strategy = _require(row, "strategy", str, line_number)
        if strategy is None:
            strategy = row_strategy
        elif row_strategy != strategy:
            raise ValidationError(
                _at(f"mixed strategies {strategy!r} and {row_strategy!r}", line_number)
            )
        predicted.append(label_space.index_of(_require(row, "predicted_label", str, line_number)))
        distribution = row.get("probabilities")
        row_has_probs = distribution is not None
        if has_probs is None:
            has_probs = row_has_probs
        elif has_probs != row_has_probs:
            raise ValidationError(_at("probabilities present on some lines but not others", line_number))
        if row_has_probs:
            if not isinstance(distribution, dict) or set(distribution) != set(label_space.labels):
                raise ValidationError(
                    _at(f"id {example_id!r}: probabilities must map every label exactly once", line_number)
                )
            prob_rows.append([float(distribution[label]) for label in label_space.labels])
        ids.append(example_id)
    if not ids:
        raise DomainError(f"prediction file {path} is empty")
    try:
        strategy_value = FusionStrategy(strategy)
    except ValueError:
        raise ValidationError(f"unknown strategy {strategy!r} in {path}") from None
    probabilities = np.array(prob_rows, dtype=np.float64) if has_probs else None
    return FusionResult(
        strategy=strategy_value,
        label_space=label_space,
        ids=tuple(ids),
        probabilities=probabilities,
        predicted=np.array(predicted, dtype=np.int64),
        weights_used=None,
    )


# ---------------------------------------------------------------------------
# Weight reports
# ---------------------------------------------------------------------------

def write_weight_report(
    weights: WeightVector,
    path: str | Path,
    perplexities: Mapping[str, float] | None = None,
    accuracies: Mapping[str, float] | None = None,
) -> None:
    """Weight report: {scheme, models: [{name, perplexity?, accuracy?, weight}]}."""
    models = []
    for name, weight in zip(weights.model_names, weights.weights):
        entry: dict = {"name": name}
        if perplexities is not None and name in perplexities:
            entry["perplexity"] = float(perplexities[name])
        if accuracies is not None and name in accuracies:
            entry["accuracy"] = float(accuracies[name])
        entry["weight"] = float(weight)
        models.append(entry)
    _write_text(path, dumps({"scheme": weights.scheme.value, "models": models}) + "\n")


def read_weight_report(path: str | Path) -> tuple[WeightVector, dict[str, dict[str, float]]]:
    obj = _load_json(path)
    scheme_name = _require(obj, "scheme", str)
    try:
        scheme = WeightScheme(scheme_name)
    except ValueError:
        raise ValidationError(f"unknown weighting scheme {scheme_name!r} in {path}") from None
    models = _require(obj, "models", list)
    names: list[str] = []
    values: list[float] = []
    diagnostics: dict[str, dict[str, float]] = {}
    for entry in models:
        if not isinstance(entry, dict):
            raise ValidationError(f"weight report {path}: each model entry must be an object")
        name = _require(entry, "name", str)
        weight = entry.get("weight")
        if isinstance(weight, bool) or not isinstance(weight, (int, float)):
            raise ValidationError(f"weight report {path}: model {name!r} has no numeric weight")
        names.append(name)
        values.append(float(weight))
        extras = {
            key: float(entry[key])
            for key in ("perplexity", "accuracy")
            if isinstance(entry.get(key), (int, float)) and not isinstance(entry.get(key), bool)
        }
        if extras:
            diagnostics[name] = extras
    if not names:
        raise ValidationError(f"weight report {path} lists no models")
    return WeightVector(tuple(names), np.array(values), scheme), diagnostics


# ---------------------------------------------------------------------------
# Balance plans and batch plans
# ---------------------------------------------------------------------------

def read_balance_plan(path: str | Path, default_seed: int | None = None) -> BalancePlan:
    """Balance config: {"caps": {"en": 40000, ...}, "seed": 42}.

    A plan without a seed falls back to ``default_seed`` (the caller's
    resolved seed), then to the library default.
    """
    obj = _load_json(path)
    caps_raw = _require(obj, "caps", dict)
    caps: dict[str, int] = {}
    for language, cap in caps_raw.items():
        if isinstance(cap, bool) or not isinstance(cap, int):
            raise ValidationError(f"cap for language {language!r} must be an integer")
        caps[str(language)] = cap
    seed = obj.get("seed")
    if seed is None:
        seed = default_seed if default_seed is not None else BalancePlan().seed
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ValidationError("seed must be an integer")
    return BalancePlan(caps=caps, seed=seed)


def write_batch_plan(plan: BatchPlan, path: str | Path) -> None:
    """JSONL of id lists, then one summary line carrying padding_waste."""
    lines = [dumps(list(batch)) for batch in plan.batches]
    lines.append(
        dumps(
            {
                "batch_size": plan.batch_size,
                "n_batches": len(plan.batches),
                "length_metric": plan.length_metric.value,
                "padding_waste": plan.padding_waste,
            }
        )
    )
    _write_text(path, "\n".join(lines) + "\n")


def read_batch_plan(path: str | Path) -> BatchPlan:
    batches: list[tuple[str, ...]] = []
    summary: dict | None = None
    for line_number, line in _read_lines(path):
        try:
            parsed = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON ({exc.msg})", line_number) from None
        if isinstance(parsed, list):
            if summary is not None:
                raise ValidationError(_at("batch line after the summary line", line_number))
            if not all(isinstance(example_id, str) for example_id in parsed):
                raise ValidationError(_at("batch lines must be arrays of id strings", line_number))
            batches.append(tuple(parsed))
        elif isinstance(parsed, dict):
            if summary is not None:
                raise ValidationError(_at("multiple summary lines", line_number))
            summary = parsed
        else:
            raise ParseError("expected a JSON array or object", line_number)
    if summary is None:
        raise ValidationError(f"batch plan {path} has no summary line")
    declared = _require(summary, "n_batches", int)
    if declared != len(batches):
        raise ValidationError(
            f"summary declares {declared} batches but file has {len(batches)}"
        )
    waste = summary.get("padding_waste")
    if isinstance(waste, bool) or not isinstance(waste, (int, float)):
        raise ValidationError("summary line must carry a numeric padding_waste")
    return BatchPlan(
        batch_size=_require(summary, "batch_size", int),
        batches=tuple(batches),
        length_metric=LengthMetric(summary.get("length_metric", LengthMetric.WHITESPACE_WORDS.value)),
        padding_waste=float(waste),
    )


def write_json(obj, path: str | Path) -> None:
    """Write any JSON-able object with deterministic float formatting."""
    _write_text(path, dumps(obj) + "\n")
