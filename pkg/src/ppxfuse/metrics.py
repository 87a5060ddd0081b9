"""Macro/micro F1, per-class precision/recall, accuracy, confusion matrices.

Conventions: 0/0 ratios are defined as 0; macro F1 averages over every class
in the label space, including classes absent from the gold set.  For
single-label classification micro F1 equals accuracy, and the report checks
that identity on construction.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import LabelSpace
from .errors import CoverageError, DomainError, ValidationError
from .fusion import FusionResult

CONSISTENCY_TOL = 1e-12


class ClassStats(NamedTuple):
    label: str
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True, eq=False)
class EvaluationReport:
    """Confusion counts (rows = gold, columns = predicted) and derived scores."""

    n_examples: int
    confusion: np.ndarray = field(repr=False)
    per_class: tuple[ClassStats, ...]
    macro_f1: float
    micro_f1: float
    accuracy: float

    def __post_init__(self):
        confusion = np.array(self.confusion, dtype=np.int64)
        n_classes = len(self.per_class)
        if confusion.shape != (n_classes, n_classes):
            raise DomainError(f"confusion shape {confusion.shape} for {n_classes} classes")
        if int(confusion.sum()) != self.n_examples:
            raise DomainError("confusion entries must sum to n_examples")
        mean_f1 = sum(stats.f1 for stats in self.per_class) / n_classes
        if not math.isclose(self.macro_f1, mean_f1, rel_tol=0.0, abs_tol=CONSISTENCY_TOL):
            raise DomainError("macro F1 disagrees with per-class mean")
        if not math.isclose(self.micro_f1, self.accuracy, rel_tol=0.0, abs_tol=CONSISTENCY_TOL):
            raise DomainError("micro F1 must equal accuracy for single-label data")
        confusion.setflags(write=False)
        object.__setattr__(self, "confusion", confusion)
        object.__setattr__(self, "per_class", tuple(self.per_class))


def _ratio(numerator: float, denominator: float) -> float:
    return numerator / denominator if denominator else 0.0


def evaluate(
    predictions: FusionResult | Mapping[str, int],
    gold: Mapping[str, int],
    label_space: LabelSpace,
) -> EvaluationReport:
    """Score predictions against gold labels.

    ``predictions`` is either a FusionResult or a plain id -> class-index map.
    Every predicted id must carry a gold label.
    """
    if isinstance(predictions, FusionResult):
        predictions = predictions.predicted_map()
    if not predictions:
        raise DomainError("cannot evaluate an empty prediction set")
    n_classes = label_space.n_classes
    counts = [[0] * n_classes for _ in range(n_classes)]
    n = 0
    for example_id, predicted_class in predictions.items():
        if example_id not in gold:
            raise CoverageError(f"no gold label for predicted id {example_id!r}")
        gold_class = gold[example_id]
        if not 0 <= gold_class < n_classes or not 0 <= predicted_class < n_classes:
            raise ValidationError(
                f"class index out of range for id {example_id!r}: "
                f"gold {gold_class}, predicted {predicted_class}"
            )
        counts[gold_class][predicted_class] += 1
        n += 1

    column_sums = [sum(counts[g][c] for g in range(n_classes)) for c in range(n_classes)]
    per_class = []
    f1_total = 0.0
    correct = 0
    for c in range(n_classes):
        tp = counts[c][c]
        precision = _ratio(tp, column_sums[c])
        recall = _ratio(tp, sum(counts[c]))
        f1 = _ratio(2.0 * precision * recall, precision + recall)
        per_class.append(ClassStats(label_space.labels[c], precision, recall, f1))
        f1_total += f1
        correct += tp

    # Pooled counts: every miss is one false positive and one false negative.
    micro_precision = _ratio(correct, correct + (n - correct))
    micro_recall = _ratio(correct, correct + (n - correct))
    micro_f1 = _ratio(2.0 * micro_precision * micro_recall, micro_precision + micro_recall)
    return EvaluationReport(
        n_examples=n,
        confusion=np.array(counts, dtype=np.int64),
        per_class=tuple(per_class),
        macro_f1=f1_total / n_classes,
        micro_f1=micro_f1,
        accuracy=correct / n,
    )


def report_to_dict(report: EvaluationReport) -> dict:
    """JSON-ready form of an evaluation report."""
    return {
        "n_examples": report.n_examples,
        "accuracy": report.accuracy,
        "micro_f1": report.micro_f1,
        "macro_f1": report.macro_f1,
        "per_class": [
            {"label": s.label, "precision": s.precision, "recall": s.recall, "f1": s.f1}
            for s in report.per_class
        ],
        "confusion": report.confusion.tolist(),
    }


def format_comparison_table(rows: Sequence[tuple[str, float, float]]) -> str:
    """Aligned strategy-comparison table: one row per strategy, micro/macro columns."""
    header = ("Ensemble Technique", "Micro F1", "Macro F1")
    name_width = max(len(header[0]), *(len(name) for name, _, _ in rows)) if rows else len(header[0])
    lines = [f"{header[0]:<{name_width}}  {header[1]:>10}  {header[2]:>10}"]
    lines.append("-" * len(lines[0]))
    for name, micro, macro in rows:
        lines.append(f"{name:<{name_width}}  {micro:>10.4f}  {macro:>10.4f}")
    return "\n".join(lines)
