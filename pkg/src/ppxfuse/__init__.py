"""Model-agnostic ensemble fusion with inverse-perplexity weighting.

Pipeline building blocks: align per-model logit bundles, softmax them into
probability matrices, estimate per-model perplexity on a labeled calibration
split, derive ensemble weights, fuse, and evaluate with macro/micro F1.
Dataset balancing, length-sorted batch planning, and a synthetic benchmark
harness round out the toolkit.
"""

from .core import (
    DEFAULT_LABELS,
    CorpusRecord,
    LabelSpace,
    LogitBundle,
    ProbabilityMatrix,
    align_bundles,
    canonical_order,
    gold_labels,
)
from .dataset import BalancePlan, BatchPlan, LengthMetric, balance, padding_waste, plan_batches, word_count
from .errors import (
    AlignmentError,
    ConfigError,
    CoverageError,
    DegenerateWeightsError,
    DomainError,
    ManifestError,
    ParseError,
    PpxfuseError,
    SchemaError,
    ValidationError,
)
from .fusion import FusionResult, FusionStrategy, majority_vote, mean_ensemble, single_model, weighted_soft_vote
from .metrics import ClassStats, EvaluationReport, evaluate, format_comparison_table, report_to_dict
from .benchmark import SyntheticModelSpec, simulate
from .probability import PROB_FLOOR, PerplexityReport, perplexity, probabilities_from_logits, softmax
from .weighting import (
    WeightScheme,
    WeightVector,
    accuracy_weights,
    inverse_perplexity_weights,
    uniform_weights,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_LABELS",
    "LabelSpace",
    "CorpusRecord",
    "LogitBundle",
    "ProbabilityMatrix",
    "align_bundles",
    "canonical_order",
    "gold_labels",
    "PerplexityReport",
    "softmax",
    "probabilities_from_logits",
    "perplexity",
    "PROB_FLOOR",
    "WeightScheme",
    "WeightVector",
    "inverse_perplexity_weights",
    "accuracy_weights",
    "uniform_weights",
    "FusionStrategy",
    "FusionResult",
    "weighted_soft_vote",
    "mean_ensemble",
    "majority_vote",
    "single_model",
    "ClassStats",
    "EvaluationReport",
    "evaluate",
    "report_to_dict",
    "format_comparison_table",
    "BalancePlan",
    "BatchPlan",
    "LengthMetric",
    "balance",
    "plan_batches",
    "padding_waste",
    "word_count",
    "SyntheticModelSpec",
    "simulate",
    "PpxfuseError",
    "SchemaError",
    "AlignmentError",
    "CoverageError",
    "DomainError",
    "DegenerateWeightsError",
    "ValidationError",
    "ParseError",
    "ManifestError",
    "ConfigError",
    "__version__",
]
