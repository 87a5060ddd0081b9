"""Turn per-model quality signals into a normalized ensemble weight vector.

The headline scheme divides by perplexity-minus-one: each model's perplexity
is adjusted by subtracting 1, and its weight is the normalized inverse of the
adjusted value, so lower-perplexity (more confident) models dominate.  The
accuracy and uniform schemes back the two baseline strategies.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateWeightsError, DomainError, SchemaError
from .probability import PerplexityReport

# Floor on (P - 1): a perfect calibration model (P == 1) receives a finite
# but overwhelmingly dominant weight instead of dividing by zero.
ADJUSTED_FLOOR = 1e-9

WEIGHT_SUM_TOL = 1e-12


class WeightScheme(str, enum.Enum):
    INVERSE_PERPLEXITY = "inverse_perplexity"
    ACCURACY = "accuracy"
    UNIFORM = "uniform"


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Normalized nonnegative ensemble weights, one per model."""

    model_names: tuple[str, ...]
    weights: np.ndarray = field(repr=False)
    scheme: WeightScheme

    def __post_init__(self):
        names = tuple(self.model_names)
        weights = np.array(self.weights, dtype=np.float64)
        if len(names) < 1:
            raise SchemaError("weight vector needs at least one model")
        if weights.shape != (len(names),):
            raise SchemaError(
                f"{len(names)} model names but weight shape {weights.shape}"
            )
        if not np.isfinite(weights).all() or (weights < 0.0).any():
            raise DomainError("weights must be finite and nonnegative")
        if abs(float(weights.sum()) - 1.0) > WEIGHT_SUM_TOL:
            raise DomainError(f"weights sum to {weights.sum()!r}, expected 1")
        weights.setflags(write=False)
        object.__setattr__(self, "model_names", names)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "scheme", WeightScheme(self.scheme))

    def __len__(self) -> int:
        return len(self.model_names)


def _normalized(names: Sequence[str], raw: np.ndarray, scheme: WeightScheme) -> WeightVector:
    # math.fsum is exactly rounded, so permuting the models permutes the
    # weights bit-for-bit (numpy's pairwise sum is order-dependent).
    return WeightVector(tuple(names), raw / math.fsum(raw), scheme)


def inverse_perplexity_weights(reports: Sequence[PerplexityReport]) -> WeightVector:
    """Weights proportional to 1 / max(P - 1, floor), normalized to sum 1."""
    if not reports:
        raise DomainError("need at least one perplexity report")
    perplexities = np.array([report.perplexity for report in reports], dtype=np.float64)
    if (perplexities < 1.0).any():
        bad = reports[int(np.argmin(perplexities))]
        raise DomainError(
            f"perplexity {bad.perplexity!r} for model {bad.model_name!r} is < 1; "
            "input is corrupted (probabilities cannot exceed 1)"
        )
    adjusted = np.maximum(perplexities - 1.0, ADJUSTED_FLOOR)
    return _normalized(
        [report.model_name for report in reports],
        1.0 / adjusted,
        WeightScheme.INVERSE_PERPLEXITY,
    )


def accuracy_weights(accuracies: Sequence[tuple[str, float]]) -> WeightVector:
    """Weights directly proportional to calibration accuracy."""
    if not accuracies:
        raise DomainError("need at least one (model, accuracy) pair")
    names = [name for name, _ in accuracies]
    values = np.array([accuracy for _, accuracy in accuracies], dtype=np.float64)
    if not np.isfinite(values).all() or (values < 0.0).any() or (values > 1.0).any():
        raise DomainError(f"accuracies must lie in [0, 1], got {values.tolist()}")
    if not (values > 0.0).any():
        raise DegenerateWeightsError("all accuracies are zero; weights are undefined")
    return _normalized(names, values, WeightScheme.ACCURACY)


def uniform_weights(model_names: Sequence[str]) -> WeightVector:
    """Equal weights 1/M; backs the mean-ensemble baseline."""
    if not model_names:
        raise DomainError("need at least one model name")
    return _normalized(model_names, np.ones(len(model_names)), WeightScheme.UNIFORM)
