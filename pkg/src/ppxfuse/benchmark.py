"""Synthetic classifier simulator with controllable accuracy and calibration.

Each simulated model is Bernoulli-correct per example at its target accuracy
and draws the confidence of its top class from a Beta(sharpness, 1)
distribution mapped onto [1/C, 1).  A miscalibration factor multiplies the
sharpness on wrong answers only, producing overconfident mistakes: accuracy
stays put while gold-class probabilities collapse, which is exactly what
drives perplexity up.  That separation is the lever the strategy-comparison
harness probes.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import DEFAULT_LABELS, CorpusRecord, LabelSpace, LogitBundle
from .errors import ConfigError

# Top-class confidence never reaches 1 exactly, so every class keeps nonzero
# probability and log-space logits stay finite.
_CONFIDENCE_CEILING = 1.0 - 1e-12


@dataclass(frozen=True, slots=True)
class SyntheticModelSpec:
    """Knobs for one simulated classifier."""

    name: str
    accuracy: float
    sharpness: float
    miscalibration: float = 0.0

    def __post_init__(self):
        if not self.name:
            raise ConfigError("synthetic model needs a non-empty name")
        if not 0.0 < self.accuracy <= 1.0:
            raise ConfigError(f"accuracy must lie in (0, 1], got {self.accuracy!r}")
        if not self.sharpness > 0.0:
            raise ConfigError(f"sharpness must be > 0, got {self.sharpness!r}")
        if self.miscalibration < 0.0:
            raise ConfigError(f"miscalibration must be >= 0, got {self.miscalibration!r}")


def simulate(
    specs: Sequence[SyntheticModelSpec],
    n_examples: int,
    class_prior: Sequence[float],
    seed: int,
    label_space: LabelSpace | None = None,
) -> tuple[list[CorpusRecord], list[LogitBundle]]:
    """Generate a labeled gold corpus and one aligned logit bundle per spec.

    Fully deterministic per seed: the gold labels and each model use
    independent child streams spawned from the seed, in spec order.
    """
    if label_space is None:
        label_space = LabelSpace(DEFAULT_LABELS)
    if not specs:
        raise ConfigError("need at least one synthetic model spec")
    names = [spec.name for spec in specs]
    if len(set(names)) != len(names):
        raise ConfigError(f"synthetic model names must be unique, got {names}")
    if n_examples < 1:
        raise ConfigError(f"n_examples must be >= 1, got {n_examples}")
    n_classes = label_space.n_classes
    prior = np.asarray(class_prior, dtype=np.float64)
    if prior.shape != (n_classes,) or (prior < 0.0).any() or abs(prior.sum() - 1.0) > 1e-9:
        raise ConfigError(
            f"class prior must be {n_classes} nonnegative values summing to 1"
        )

    width = max(6, len(str(n_examples)))
    ids = tuple(f"ex{i:0{width}d}" for i in range(n_examples))

    streams = np.random.SeedSequence(seed).spawn(1 + len(specs))
    gold_rng = np.random.default_rng(streams[0])
    gold = gold_rng.choice(n_classes, size=n_examples, p=prior / prior.sum())

    corpus = [
        CorpusRecord(
            id=ids[i],
            text="synthetic",
            language="en",
            source="simulator",
            label=int(gold[i]),
        )
        for i in range(n_examples)
    ]

    bundles = []
    rows = np.arange(n_examples)
    for spec, stream in zip(specs, streams[1:]):
        rng = np.random.default_rng(stream)
        correct = rng.random(n_examples) < spec.accuracy
        offsets = rng.integers(1, n_classes, size=n_examples)
        predicted = np.where(correct, gold, (gold + offsets) % n_classes)

        # Beta(a, 1) by inverse transform: u = x**(1/a); wrong answers use a
        # boosted shape so miscalibrated models are confident when mistaken.
        shape = np.where(
            correct, spec.sharpness, spec.sharpness * (1.0 + spec.miscalibration)
        )
        u = rng.random(n_examples) ** (1.0 / shape)
        top = 1.0 / n_classes + (1.0 - 1.0 / n_classes) * u
        top = np.minimum(top, _CONFIDENCE_CEILING)

        probabilities = np.repeat(((1.0 - top) / (n_classes - 1))[:, None], n_classes, axis=1)
        probabilities[rows, predicted] = top
        bundles.append(LogitBundle(spec.name, label_space, ids, np.log(probabilities)))
    return corpus, bundles


def read_sim_spec(path: str | Path) -> tuple[list[SyntheticModelSpec], int, list[float], int, LabelSpace]:
    """Read a simulator spec file: {models, n, prior, seed} plus optional labels."""
    # Local import: formats depends on nothing here, but keeps module layering flat.
    from .formats import _load_json

    obj = _load_json(path)
    models_raw = obj.get("models")
    if not isinstance(models_raw, list) or not models_raw:
        raise ConfigError(f"spec {path} must list at least one model")
    specs = []
    for entry in models_raw:
        if not isinstance(entry, dict) or "name" not in entry:
            raise ConfigError(f"spec {path}: each model needs at least a name")
        specs.append(
            SyntheticModelSpec(
                name=str(entry["name"]),
                accuracy=float(entry.get("accuracy", 0.0)),
                sharpness=float(entry.get("sharpness", 0.0)),
                miscalibration=float(entry.get("miscalibration", 0.0)),
            )
        )
    n_examples = obj.get("n")
    if isinstance(n_examples, bool) or not isinstance(n_examples, int):
        raise ConfigError(f"spec {path}: 'n' must be an integer")
    prior = obj.get("prior")
    if not isinstance(prior, list):
        raise ConfigError(f"spec {path}: 'prior' must be a list of probabilities")
    seed = obj.get("seed")
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"spec {path}: 'seed' must be an integer")
    labels = obj.get("labels", list(DEFAULT_LABELS))
    if not isinstance(labels, list) or not all(isinstance(name, str) for name in labels):
        raise ConfigError(f"spec {path}: 'labels' must be a list of strings")
    return specs, n_examples, [float(p) for p in prior], seed, LabelSpace(tuple(labels))
