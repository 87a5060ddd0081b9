import math

import numpy as np
import pytest

from ppxfuse import (
    BalancePlan,
    BatchPlan,
    ConfigError,
    CorpusRecord,
    DomainError,
    ValidationError,
    balance,
    padding_waste,
    plan_batches,
    word_count,
)


def record(i, language="en", words=3):
    return CorpusRecord(
        id=f"{language}-{i:06d}",
        text=" ".join(["w"] * words),
        language=language,
        source="s",
    )


class TestWordCount:
    def test_whitespace_runs_collapse(self):
        assert word_count("one  two\tthree\nfour ") == 4

    def test_empty(self):
        assert word_count("") == 0


class TestBalance:
    def test_over_cap_language_downsampled(self):
        corpus = [record(i) for i in range(10)]
        plan = BalancePlan(caps={"en": 4}, seed=42)
        kept = balance(corpus, plan)
        assert len(kept) == 4
        assert all(r.language == "en" for r in kept)

    def test_under_cap_passes_through(self):
        corpus = [record(i, "ur") for i in range(5)]
        kept = balance(corpus, BalancePlan(caps={"ur": 100}, seed=42))
        assert [r.id for r in kept] == sorted(r.id for r in corpus)

    def test_uncapped_language_passes_through(self):
        corpus = [record(i, "bg") for i in range(5)]
        kept = balance(corpus, BalancePlan(caps={"en": 1}, seed=42))
        assert len(kept) == 5

    def test_deterministic_per_seed(self):
        corpus = [record(i) for i in range(200)]
        plan = BalancePlan(caps={"en": 50}, seed=42)
        first = [r.id for r in balance(corpus, plan)]
        second = [r.id for r in balance(corpus, plan)]
        assert first == second
        different = [r.id for r in balance(corpus, BalancePlan(caps={"en": 50}, seed=43))]
        assert different != first

    def test_selection_independent_of_row_order(self):
        corpus = [record(i) for i in range(100)]
        plan = BalancePlan(caps={"en": 30}, seed=7)
        forward = balance(corpus, plan)
        backward = balance(list(reversed(corpus)), plan)
        assert [r.id for r in forward] == [r.id for r in backward]

    def test_records_not_altered(self):
        corpus = [record(i) for i in range(10)]
        kept = balance(corpus, BalancePlan(caps={"en": 5}, seed=1))
        originals = {r.id: r for r in corpus}
        assert all(kept_record is originals[kept_record.id] for kept_record in kept)

    def test_output_in_canonical_order(self):
        corpus = [record(i, "zh") for i in range(4)] + [record(i, "ar") for i in range(4)]
        kept = balance(corpus, BalancePlan(caps={}, seed=42))
        assert [r.id for r in kept] == sorted(r.id for r in kept)

    def test_cap_must_be_positive(self):
        with pytest.raises(ConfigError):
            BalancePlan(caps={"en": 0}, seed=42)

    def test_seed_range_validated(self):
        with pytest.raises(ConfigError):
            BalancePlan(caps={}, seed=-1)


class TestPaddingWaste:
    def test_uniform_lengths_no_waste(self):
        assert padding_waste([7, 7, 7, 7], 2) == 0.0

    def test_hand_example(self):
        # one batch of [10, 1]: padded = 20, content = 11 -> waste 9/20
        assert padding_waste([10, 1], 2) == 0.45
        assert padding_waste([10, 1], 1) == 0.0

    def test_all_empty_texts(self):
        assert padding_waste([0, 0], 2) == 0.0

    def test_matches_direct_formula(self):
        rng = np.random.default_rng(51)
        for _ in range(30):
            lengths = rng.integers(0, 50, size=rng.integers(1, 40)).tolist()
            batch_size = int(rng.integers(1, 8))
            padded = content = 0
            for start in range(0, len(lengths), batch_size):
                chunk = lengths[start : start + batch_size]
                padded += max(chunk) * len(chunk)
                content += sum(chunk)
            expected = (padded - content) / padded if padded else 0.0
            assert math.isclose(padding_waste(lengths, batch_size), expected, abs_tol=1e-15)


class TestPlanBatches:
    def corpus_with_lengths(self, lengths):
        return [
            CorpusRecord(id=f"id{i:03d}", text=" ".join(["w"] * n), language="en", source="s")
            for i, n in enumerate(lengths)
        ]

    def test_partition_exact_and_sorted(self):
        corpus = self.corpus_with_lengths([5, 1, 9, 3, 3, 7])
        plan = plan_batches(corpus, 2)
        flat = [example_id for batch in plan.batches for example_id in batch]
        assert sorted(flat) == sorted(r.id for r in corpus)
        lengths = {r.id: word_count(r.text) for r in corpus}
        ordered = [lengths[i] for i in flat]
        assert ordered == sorted(ordered, reverse=True)
        for batch in plan.batches:
            batch_lengths = [lengths[i] for i in batch]
            assert batch_lengths == sorted(batch_lengths, reverse=True)

    def test_ties_break_by_id(self):
        corpus = self.corpus_with_lengths([4, 4, 4])
        plan = plan_batches(corpus, 2)
        assert plan.batches[0] == ("id000", "id001")
        assert plan.batches[1] == ("id002",)

    def test_same_length_means_zero_waste(self):
        plan = plan_batches(self.corpus_with_lengths([6] * 10), 4)
        assert plan.padding_waste == 0.0

    def test_sorted_beats_shuffled_on_lognormal(self):
        rng = np.random.default_rng(52)
        lengths = np.maximum(1, rng.lognormal(4.0, 1.0, size=2000).astype(int)).tolist()
        corpus = self.corpus_with_lengths(lengths)
        plan = plan_batches(corpus, 16)
        shuffled = lengths[:]
        rng.shuffle(shuffled)
        assert plan.padding_waste < padding_waste(shuffled, 16)

    def test_waste_in_range(self):
        rng = np.random.default_rng(53)
        for _ in range(20):
            lengths = rng.integers(1, 100, size=rng.integers(1, 50)).tolist()
            plan = plan_batches(self.corpus_with_lengths(lengths), int(rng.integers(1, 9)))
            assert 0.0 <= plan.padding_waste < 1.0

    def test_empty_corpus_rejected(self):
        with pytest.raises(DomainError):
            plan_batches([], 4)

    def test_duplicate_ids_rejected(self):
        r = CorpusRecord(id="dup", text="a b", language="en", source="s")
        with pytest.raises(ValidationError):
            plan_batches([r, r], 2)

    def test_bad_batch_size_rejected(self):
        with pytest.raises(ConfigError):
            plan_batches(self.corpus_with_lengths([3]), 0)

    def test_batch_plan_type_validation(self):
        with pytest.raises(DomainError):
            BatchPlan(batch_size=2, batches=(("a",),), padding_waste=1.5)
