"""Combine aligned per-model probability matrices into final predictions.

Four strategies: weighted soft voting (weight-convex combination of the
model distributions), mean ensemble (uniform weights), majority voting
(one argmax vote per model), and single (one model's argmax, the degenerate
ensemble).  All argmax ties break toward the lowest class index; majority
ties break by highest summed probability first.  Identical inputs produce
identical results across runs: rows are fused in a fixed sequential order.
"""

from __future__ import annotations

import enum
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .core import LabelSpace, ProbabilityMatrix
from .errors import AlignmentError, DomainError, SchemaError
from .weighting import WeightVector, uniform_weights

ROW_SUM_TOL = 1e-9


class FusionStrategy(str, enum.Enum):
    WEIGHTED_SOFT = "weighted_soft"
    MEAN = "mean"
    MAJORITY = "majority"
    SINGLE = "single"


@dataclass(frozen=True, eq=False)
class FusionResult:
    """Per-example fused distributions (absent for majority) and predictions."""

    strategy: FusionStrategy
    label_space: LabelSpace
    ids: tuple[str, ...]
    probabilities: np.ndarray | None = field(repr=False)
    predicted: np.ndarray = field(repr=False)
    weights_used: WeightVector | None = None

    def __post_init__(self):
        ids = tuple(self.ids)
        n, n_classes = len(ids), self.label_space.n_classes
        predicted = np.array(self.predicted, dtype=np.int64)
        if predicted.shape != (n,):
            raise SchemaError(f"expected {n} predictions, got shape {predicted.shape}")
        if n and (predicted.min() < 0 or predicted.max() >= n_classes):
            raise SchemaError("predicted class index outside label space")
        probabilities = self.probabilities
        if probabilities is not None:
            probabilities = np.array(probabilities, dtype=np.float64)
            if probabilities.shape != (n, n_classes):
                raise SchemaError(
                    f"expected fused shape ({n}, {n_classes}), got {probabilities.shape}"
                )
            sums = probabilities.sum(axis=1)
            if n and np.abs(sums - 1.0).max() > ROW_SUM_TOL:
                worst = int(np.argmax(np.abs(sums - 1.0)))
                raise DomainError(
                    f"fused row for id {ids[worst]!r} sums to {sums[worst]!r}"
                )
            if not np.array_equal(predicted, probabilities.argmax(axis=1)):
                raise DomainError("predictions disagree with fused argmax")
            probabilities.setflags(write=False)
        predicted.setflags(write=False)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "probabilities", probabilities)
        object.__setattr__(self, "predicted", predicted)
        object.__setattr__(self, "strategy", FusionStrategy(self.strategy))

    def __len__(self) -> int:
        return len(self.ids)

    def predicted_map(self) -> dict[str, int]:
        return {example_id: int(c) for example_id, c in zip(self.ids, self.predicted)}


def _check_aligned(matrices: Sequence[ProbabilityMatrix]) -> None:
    if not matrices:
        raise DomainError("need at least one probability matrix")
    first = matrices[0]
    if len(first) == 0:
        raise DomainError("cannot fuse empty matrices")
    for matrix in matrices[1:]:
        if matrix.label_space.labels != first.label_space.labels:
            raise SchemaError(
                f"matrix {matrix.model_name!r} uses label order "
                f"{matrix.label_space.labels}, expected {first.label_space.labels}"
            )
        if matrix.ids != first.ids:
            raise AlignmentError(
                f"matrix {matrix.model_name!r} is not aligned with "
                f"{first.model_name!r}; align bundles before fusing"
            )


def _match_weights(matrices: Sequence[ProbabilityMatrix], weights: WeightVector) -> WeightVector:
    """Check the weight vector against the matrices, reordering by name if needed."""
    matrix_names = tuple(matrix.model_name for matrix in matrices)
    if len(weights) != len(matrices):
        raise SchemaError(
            f"{len(weights)} weights for {len(matrices)} matrices"
        )
    if weights.model_names == matrix_names:
        return weights
    if len(set(matrix_names)) == len(matrix_names) and set(weights.model_names) == set(matrix_names):
        order = [weights.model_names.index(name) for name in matrix_names]
        return WeightVector(matrix_names, weights.weights[order], weights.scheme)
    raise SchemaError(
        f"weight models {weights.model_names} do not match matrices {matrix_names}"
    )


def weighted_soft_vote(matrices: Sequence[ProbabilityMatrix], weights: WeightVector) -> FusionResult:
    """Fuse distributions as their weight-convex combination, then argmax.

    Models are summed left-to-right in input order; fused rows are convex
    combinations of normalized rows, so no re-normalization is applied (a
    defensive check asserts the row-sum bound instead).
    """
    _check_aligned(matrices)
    weights = _match_weights(matrices, weights)
    fused = weights.weights[0] * matrices[0].values
    for weight, matrix in zip(weights.weights[1:], matrices[1:]):
        fused = fused + weight * matrix.values
    return FusionResult(
        strategy=FusionStrategy.WEIGHTED_SOFT,
        label_space=matrices[0].label_space,
        ids=matrices[0].ids,
        probabilities=fused,
        predicted=fused.argmax(axis=1),
        weights_used=weights,
    )


def mean_ensemble(matrices: Sequence[ProbabilityMatrix]) -> FusionResult:
    """Soft voting with uniform weights; identical arithmetic, mean provenance."""
    _check_aligned(matrices)
    soft = weighted_soft_vote(
        matrices, uniform_weights([matrix.model_name for matrix in matrices])
    )
    return FusionResult(
        strategy=FusionStrategy.MEAN,
        label_space=soft.label_space,
        ids=soft.ids,
        probabilities=soft.probabilities,
        predicted=soft.predicted,
        weights_used=soft.weights_used,
    )


def majority_vote(matrices: Sequence[ProbabilityMatrix]) -> FusionResult:
    """One argmax vote per model; plurality wins.

    Vote ties break by the highest probability mass summed across models,
    then by lowest class index.  No fused distribution is reported.
    """
    _check_aligned(matrices)
    n, n_classes = len(matrices[0]), matrices[0].label_space.n_classes
    votes = np.zeros((n, n_classes), dtype=np.int64)
    summed = np.zeros((n, n_classes), dtype=np.float64)
    row_index = np.arange(n)
    for matrix in matrices:
        votes[row_index, matrix.values.argmax(axis=1)] += 1
        summed = summed + matrix.values
    tied = votes == votes.max(axis=1, keepdims=True)
    tie_break = np.where(tied, summed, -np.inf)
    return FusionResult(
        strategy=FusionStrategy.MAJORITY,
        label_space=matrices[0].label_space,
        ids=matrices[0].ids,
        probabilities=None,
        predicted=tie_break.argmax(axis=1),
        weights_used=None,
    )


def single_model(matrix: ProbabilityMatrix) -> FusionResult:
    """One model's argmax predictions, packaged as the degenerate ensemble."""
    _check_aligned([matrix])
    return FusionResult(
        strategy=FusionStrategy.SINGLE,
        label_space=matrix.label_space,
        ids=matrix.ids,
        probabilities=matrix.values,
        predicted=matrix.values.argmax(axis=1),
        weights_used=None,
    )
