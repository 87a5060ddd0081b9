"""Numerically stable softmax and classification perplexity.

Perplexity here is the classification form: exp of the mean negative log
probability assigned to the gold class over a labeled set.  1 means perfect
confidence, 2 means uniform binary guessing.  The reported value is summed
left-to-right in canonical id order so repeated runs are bit-identical.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .core import ProbabilityMatrix, LogitBundle, canonical_order
from .errors import CoverageError, DomainError, ValidationError

# A single zero-probability gold class would make perplexity infinite and
# destroy downstream weighting, so gold probabilities are clamped before log.
PROB_FLOOR = 1e-12


@dataclass(frozen=True, slots=True)
class PerplexityReport:
    """A model's perplexity on a labeled calibration split."""

    model_name: str
    perplexity: float
    n_examples: int
    mean_nll: float

    def __post_init__(self):
        if self.n_examples < 1:
            raise DomainError("perplexity report needs at least one example")
        if self.mean_nll < 0.0:
            raise DomainError(f"mean NLL must be >= 0, got {self.mean_nll!r}")
        if not math.isclose(self.perplexity, math.exp(self.mean_nll), rel_tol=1e-12):
            raise DomainError(
                f"perplexity {self.perplexity!r} inconsistent with "
                f"mean NLL {self.mean_nll!r}"
            )


def softmax(logits: Sequence[float] | np.ndarray) -> np.ndarray:
    """Shift-invariant softmax of one logit vector (max is subtracted first)."""
    x = np.asarray(logits, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 2:
        raise DomainError(f"softmax expects a vector of length >= 2, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise DomainError("softmax input must be finite")
    shifted = x - x.max()
    exps = np.exp(shifted)
    return exps / exps.sum()


def probabilities_from_logits(bundle: LogitBundle) -> ProbabilityMatrix:
    """Row-wise softmax of a logit bundle; ids and ordering are preserved."""
    values = bundle.values
    if len(bundle) == 0:
        probs = values.copy()
    else:
        shifted = values - values.max(axis=1, keepdims=True)
        exps = np.exp(shifted)
        probs = exps / exps.sum(axis=1, keepdims=True)
    return ProbabilityMatrix(bundle.model_name, bundle.label_space, bundle.ids, probs)


def perplexity(probs: ProbabilityMatrix, gold: Mapping[str, int]) -> PerplexityReport:
    """Perplexity of a model's gold-class probabilities.

    Computes exp(-(1/N) * sum(log p_gold)) with gold-class probabilities
    clamped to [PROB_FLOOR, 1].  Every id in the matrix must carry a gold
    label; the sum runs left-to-right over ids in canonical order.
    """
    n = len(probs)
    if n == 0:
        raise DomainError("cannot compute perplexity of an empty matrix")
    missing = [example_id for example_id in probs.ids if example_id not in gold]
    if missing:
        raise CoverageError(
            f"{len(missing)} example(s) lack gold labels, e.g. {missing[:5]!r}"
        )
    index = {example_id: i for i, example_id in enumerate(probs.ids)}
    n_classes = probs.label_space.n_classes
    total_nll = 0.0
    for example_id in canonical_order(probs.ids):
        gold_class = gold[example_id]
        if not 0 <= gold_class < n_classes:
            raise ValidationError(
                f"gold label {gold_class} for id {example_id!r} outside "
                f"{n_classes}-class label space"
            )
        p = float(probs.values[index[example_id], gold_class])
        total_nll -= math.log(min(max(p, PROB_FLOOR), 1.0))
    mean_nll = total_nll / n
    return PerplexityReport(probs.model_name, math.exp(mean_nll), n, mean_nll)
