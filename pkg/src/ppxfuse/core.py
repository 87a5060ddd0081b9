"""Shared domain types: label spaces, corpus records, logit/probability rows.

All types are immutable after construction (frozen dataclasses, read-only
numpy buffers) and therefore safe to share across concurrent readers.
Example ordering is canonical everywhere: lexicographic by id string, so
downstream results never depend on file row order.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import AlignmentError, SchemaError, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_LABELS = ("human", "machine")


def canonical_order(ids: Iterable[str]) -> list[str]:
    """Canonical example ordering: lexicographic by id string."""
    return sorted(ids)


@dataclass(frozen=True, slots=True)
class LabelSpace:
    """Ordered, immutable class-name list; index i refers to labels[i] everywhere."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if len(labels) < 2:
            raise SchemaError(f"label space needs at least 2 classes, got {len(labels)}")
        if any(not isinstance(name, str) or not name for name in labels):
            raise SchemaError("label names must be non-empty strings")
        if len(set(labels)) != len(labels):
            raise SchemaError(f"label names must be unique, got {labels!r}")

    @property
    def n_classes(self) -> int:
        return len(self.labels)

    def index_of(self, label: str) -> int:
        """Map a label string to its class index; matching is case-sensitive."""
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError(
                f"unknown label {label!r}; expected one of {list(self.labels)}"
            ) from None


@dataclass(frozen=True, slots=True)
class CorpusRecord:
    """One text example with identity, origin metadata, and an optional gold label."""

    id: str
    text: str
    language: str
    source: str
    sub_source: str = ""
    model: str = ""
    label: int | None = None

    def __post_init__(self):
        if not self.id:
            raise ValidationError("record id must be non-empty")
        if self.label is not None and self.label < 0:
            raise ValidationError(f"record {self.id!r}: label index must be >= 0")


def gold_labels(records: Sequence[CorpusRecord], label_space: LabelSpace | None = None) -> dict[str, int]:
    """Collect id -> gold class index from the labeled records of a corpus.

    Duplicate ids and (when a label space is given) out-of-range labels are
    rejected rather than repaired.
    """
    gold: dict[str, int] = {}
    for record in records:
        if record.label is None:
            continue
        if record.id in gold:
            raise ValidationError(f"duplicate id {record.id!r} in gold corpus")
        if label_space is not None and record.label >= label_space.n_classes:
            raise ValidationError(
                f"record {record.id!r}: label index {record.label} outside "
                f"{label_space.n_classes}-class label space"
            )
        gold[record.id] = record.label
    return gold


def _validated_rows(ids: Sequence[str], values: np.ndarray, n_classes: int, what: str) -> tuple[tuple[str, ...], np.ndarray]:
    ids = tuple(ids)
    values = np.array(values, dtype=np.float64)
    if values.ndim != 2 or values.shape != (len(ids), n_classes):
        raise SchemaError(
            f"{what}: expected shape ({len(ids)}, {n_classes}), got {values.shape}"
        )
    finite_rows = np.isfinite(values).all(axis=1)
    if not finite_rows.all():
        bad = ids[int(np.argmin(finite_rows))]
        raise ValidationError(f"{what}: non-finite value in row for id {bad!r}")
    if len(set(ids)) != len(ids):
        raise ValidationError(f"{what}: example ids are not unique")
    values.setflags(write=False)
    return ids, values


@dataclass(frozen=True, eq=False)
class LogitBundle:
    """One model's raw per-example class scores over a corpus.

    ``values[i]`` holds the length-C logit vector for ``ids[i]``.
    """

    model_name: str
    label_space: LabelSpace
    ids: tuple[str, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        ids, values = _validated_rows(
            self.ids, self.values, self.label_space.n_classes, f"bundle {self.model_name!r}"
        )
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.ids)

    def rows(self) -> Iterable[tuple[str, np.ndarray]]:
        return zip(self.ids, self.values)


@dataclass(frozen=True, eq=False)
class ProbabilityMatrix:
    """Per-example class distributions for one model; every row sums to 1."""

    model_name: str
    label_space: LabelSpace
    ids: tuple[str, ...]
    values: np.ndarray = field(repr=False)

    ROW_SUM_TOL = 1e-9

    def __post_init__(self):
        ids, values = _validated_rows(
            self.ids, self.values, self.label_space.n_classes, f"matrix {self.model_name!r}"
        )
        if values.size:
            if values.min() < 0.0 or values.max() > 1.0:
                raise ValidationError(
                    f"matrix {self.model_name!r}: probabilities must lie in [0, 1]"
                )
            sums = values.sum(axis=1)
            worst = int(np.argmax(np.abs(sums - 1.0)))
            if not math.isclose(sums[worst], 1.0, rel_tol=0.0, abs_tol=self.ROW_SUM_TOL):
                raise ValidationError(
                    f"matrix {self.model_name!r}: row for id {ids[worst]!r} sums to "
                    f"{sums[worst]!r}, outside 1 +/- {self.ROW_SUM_TOL}"
                )
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.ids)

    def rows(self) -> Iterable[tuple[str, np.ndarray]]:
        return zip(self.ids, self.values)

    def subset(self, ids: Iterable[str]) -> "ProbabilityMatrix":
        """Rows for the given ids, in canonical order; unknown ids are rejected."""
        index = {example_id: i for i, example_id in enumerate(self.ids)}
        wanted = canonical_order(set(ids))
        missing = [example_id for example_id in wanted if example_id not in index]
        if missing:
            raise ValidationError(
                f"matrix {self.model_name!r}: no rows for ids {missing[:5]!r}"
            )
        take = [index[example_id] for example_id in wanted]
        return ProbabilityMatrix(self.model_name, self.label_space, wanted, self.values[take])


def align_bundles(bundles: Sequence[LogitBundle]) -> tuple[list[LogitBundle], tuple[str, ...]]:
    """Restrict bundles to their common ids, each sorted in canonical id order.

    Returns the aligned bundles plus the ids dropped from any bundle.  The
    output is a deterministic function of the id sets alone, so applying the
    operation twice changes nothing.
    """
    if not bundles:
        raise AlignmentError("need at least one bundle to align")
    space = bundles[0].label_space
    for bundle in bundles[1:]:
        if bundle.label_space.labels != space.labels:
            raise SchemaError(
                f"bundle {bundle.model_name!r} has label order "
                f"{bundle.label_space.labels}, expected {space.labels}"
            )
    id_sets = [set(bundle.ids) for bundle in bundles]
    common = set.intersection(*id_sets)
    if not common:
        raise AlignmentError(
            f"no example ids shared by all {len(bundles)} bundles"
        )
    order = canonical_order(common)
    dropped = tuple(canonical_order(set.union(*id_sets) - common))
    if dropped:
        logger.info("alignment dropped %d ids not shared by all bundles", len(dropped))
    aligned = []
    for bundle in bundles:
        index = {example_id: i for i, example_id in enumerate(bundle.ids)}
        take = [index[example_id] for example_id in order]
        aligned.append(
            LogitBundle(bundle.model_name, bundle.label_space, order, bundle.values[take])
        )
    return aligned, dropped
