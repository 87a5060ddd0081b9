import json
import os

import pytest

os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")
os.environ.setdefault("HF_HUB_OFFLINE", "1")

WORDS = [f"w{i:02d}" for i in range(20)]


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory):
    """A small randomly initialized 2-class BERT saved locally for offline tests."""
    import torch
    from transformers import BertConfig, BertForSequenceClassification, BertTokenizer

    ckpt = tmp_path_factory.mktemp("tiny-bert")
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"] + WORDS
    (ckpt / "vocab.txt").write_text("\n".join(vocab) + "\n")
    BertTokenizer(str(ckpt / "vocab.txt")).save_pretrained(str(ckpt))

    torch.manual_seed(0)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=512,
        num_labels=2,
        # wide init keeps the untrained head input-sensitive, so id mixups
        # would actually change logits in the tests below
        initializer_range=0.5,
        id2label={0: "human", 1: "machine"},
        label2id={"human": 0, "machine": 1},
    )
    BertForSequenceClassification(config).save_pretrained(str(ckpt))
    return ckpt


def write_corpus(path, n, seed=0, max_words=30):
    """Deterministic varied-length corpus over the tiny checkpoint's vocabulary."""
    import random

    rng = random.Random(seed)
    lines = []
    for i in range(n):
        words = [rng.choice(WORDS) for _ in range(rng.randint(1, max_words))]
        lines.append(json.dumps({
            "id": f"rec{i:05d}",
            "text": " ".join(words),
            "language": "en",
            "source": "test",
        }))
    path.write_text("\n".join(lines) + "\n")
    return path
