"""Language-balanced downsampling and padding-minimizing batch planning.

Balancing caps overrepresented languages by seeded uniform subsampling
(defaults reproduce the en -> 40,000 / zh -> 20,000 reduction).  Batch
planning sorts records by whitespace word count so same-length texts share
batches; the padding_waste figure is the fraction of padded positions that
would hold no content, the measurable stand-in for inference time saved.
"""

from __future__ import annotations

import enum
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .core import CorpusRecord
from .errors import ConfigError, DomainError, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_SEED = 42
DEFAULT_CAPS = {"en": 40_000, "zh": 20_000}


class LengthMetric(str, enum.Enum):
    WHITESPACE_WORDS = "whitespace_words"


def word_count(text: str) -> int:
    """Whitespace-delimited word count (not subword tokens)."""
    return len(text.split())


@dataclass(frozen=True)
class BalancePlan:
    """Per-language sample caps plus the subsampling seed."""

    caps: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_CAPS))
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        for language, cap in self.caps.items():
            if cap < 1:
                raise ConfigError(f"cap for language {language!r} must be >= 1, got {cap}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


@dataclass(frozen=True)
class BatchPlan:
    """Ordered batches of example ids plus the padding-waste figure."""

    batch_size: int
    batches: tuple[tuple[str, ...], ...]
    length_metric: LengthMetric = LengthMetric.WHITESPACE_WORDS
    padding_waste: float = 0.0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0.0 <= self.padding_waste < 1.0:
            raise DomainError(f"padding_waste must lie in [0, 1), got {self.padding_waste!r}")
        object.__setattr__(self, "batches", tuple(tuple(batch) for batch in self.batches))


def balance(corpus: Sequence[CorpusRecord], plan: BalancePlan) -> list[CorpusRecord]:
    """Downsample capped languages to their cap; everything else passes through.

    Selection is uniform within each language, driven by a generator derived
    from (seed, language), so the retained id set depends only on the corpus
    contents and the plan, never on input row order.  Output is in canonical
    id order.
    """
    by_language: dict[str, list[CorpusRecord]] = {}
    for record in corpus:
        by_language.setdefault(record.language, []).append(record)

    kept: list[CorpusRecord] = []
    for language in sorted(by_language):
        records = sorted(by_language[language], key=lambda record: record.id)
        cap = plan.caps.get(language)
        if cap is None:
            logger.info("language %r has no cap; %d records pass through", language, len(records))
            kept.extend(records)
        elif len(records) <= cap:
            kept.extend(records)
        else:
            rng = np.random.default_rng(
                np.random.SeedSequence([plan.seed, *language.encode("utf-8")])
            )
            chosen = rng.choice(len(records), size=cap, replace=False)
            kept.extend(records[i] for i in sorted(chosen.tolist()))
            logger.info("language %r downsampled %d -> %d", language, len(records), cap)
    kept.sort(key=lambda record: record.id)
    return kept


def padding_waste(lengths: Sequence[int], batch_size: int) -> float:
    """Fraction of padded positions holding no content, for the given order.

    Records are chunked into consecutive batches of ``batch_size`` and each
    batch is padded to its longest member.  Returns 0.0 for an all-empty
    corpus (nothing to pad).
    """
    if batch_size < 1:
        raise ConfigError(f"batch_size must be >= 1, got {batch_size}")
    padded = 0
    content = 0
    for start in range(0, len(lengths), batch_size):
        chunk = lengths[start : start + batch_size]
        longest = max(chunk)
        padded += longest * len(chunk)
        content += sum(chunk)
    return (padded - content) / padded if padded else 0.0


def plan_batches(corpus: Sequence[CorpusRecord], batch_size: int) -> BatchPlan:
    """Sort by word count (descending, ties by id) and chunk into batches."""
    if batch_size < 1:
        raise ConfigError(f"batch_size must be >= 1, got {batch_size}")
    if not corpus:
        raise DomainError("cannot plan batches for an empty corpus")
    if len({record.id for record in corpus}) != len(corpus):
        raise ValidationError("corpus ids must be unique to plan batches")
    ordered = sorted(corpus, key=lambda record: (-word_count(record.text), record.id))
    lengths = [word_count(record.text) for record in ordered]
    batches = tuple(
        tuple(record.id for record in ordered[start : start + batch_size])
        for start in range(0, len(ordered), batch_size)
    )
    return BatchPlan(
        batch_size=batch_size,
        batches=batches,
        length_metric=LengthMetric.WHITESPACE_WORDS,
        padding_waste=padding_waste(lengths, batch_size),
    )
