import numpy as np
import pytest

from ppxfuse import LabelSpace, LogitBundle, ProbabilityMatrix


@pytest.fixture
def binary_space():
    return LabelSpace(("human", "machine"))


def make_matrix(name, space, rows):
    """Build a ProbabilityMatrix from {id: [p_0, ..., p_C-1]}."""
    ids = tuple(rows)
    return ProbabilityMatrix(name, space, ids, np.array([rows[i] for i in ids]))


def make_bundle(name, space, rows):
    ids = tuple(rows)
    return LogitBundle(name, space, ids, np.array([rows[i] for i in ids]))


def random_aligned_matrices(rng, n_models, n_examples, n_classes, sharp=1.0):
    """Aligned random probability matrices over a shared id set."""
    space = LabelSpace(tuple(f"c{k}" for k in range(n_classes)))
    ids = tuple(f"id{i:04d}" for i in range(n_examples))
    matrices = []
    for m in range(n_models):
        raw = rng.gamma(sharp, size=(n_examples, n_classes))
        raw = np.maximum(raw, 1e-9)
        matrices.append(
            ProbabilityMatrix(f"model{m}", space, ids, raw / raw.sum(axis=1, keepdims=True))
        )
    return space, matrices
