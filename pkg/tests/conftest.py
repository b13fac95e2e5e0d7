"""Shared fixtures and synthetic data builders."""

from __future__ import annotations

import numpy as np
import pytest

from faqmatch.encoder import EncoderParams, init_params
from faqmatch.kb import KnowledgeBase, ingest
from faqmatch.numgrad import FixedIdf


def make_params(rows: dict[str, list[float]], context_alpha: float = 0.0) -> EncoderParams:
    """Encoder params with hand-set rows; UNK row is zeros."""
    tokens = sorted(rows)
    dim = len(next(iter(rows.values())))
    table = np.array([rows[t] for t in tokens] + [[0.0] * dim], dtype=np.float64)
    return EncoderParams(
        dim=dim,
        vocab={t: i for i, t in enumerate(tokens)},
        table=table,
        context_alpha=context_alpha,
        tokens_by_row=tokens,
    )


def one_hot_params(tokens: list[str], context_alpha: float = 0.0) -> EncoderParams:
    """Orthogonal one-hot rows, one axis per token (dim floor of 2)."""
    unique = sorted(set(tokens))
    dim = max(2, len(unique))
    return make_params(
        {t: [1.0 if i == j else 0.0 for j in range(dim)] for i, t in enumerate(unique)},
        context_alpha=context_alpha,
    )


def synthetic_records(
    rng: np.random.Generator,
    n_entries: int,
    vocab_size: int = 400,
    question_words: tuple[int, int] = (3, 8),
    sentences: tuple[int, int] = (1, 5),
    sentence_words: tuple[int, int] = (4, 10),
) -> list[dict]:
    """Random KB records with pre-split answer sentences."""
    words = [f"w{i:04d}" for i in range(vocab_size)]

    def phrase(low: int, high: int) -> str:
        size = int(rng.integers(low, high + 1))
        return " ".join(words[i] for i in rng.integers(0, vocab_size, size=size))

    records = []
    for i in range(n_entries):
        n_sent = int(rng.integers(sentences[0], sentences[1] + 1))
        records.append(
            {
                "id": f"faq-{i:05d}",
                "question": phrase(*question_words),
                "answer_sentences": [phrase(*sentence_words) for _ in range(n_sent)],
            }
        )
    return records


def synthetic_kb(seed: int, n_entries: int, **kwargs) -> KnowledgeBase:
    rng = np.random.default_rng(seed)
    return ingest(synthetic_records(rng, n_entries, **kwargs))


def kb_encoder_params(kb: KnowledgeBase, seed: int = 0, dim: int = 16, context_alpha: float = 0.0) -> EncoderParams:
    vocab: set[str] = set()
    for entry in kb.entries:
        vocab.update(entry.question.tokens)
        for sentence in entry.answer_sentences:
            vocab.update(sentence.tokens)
    return init_params(seed, dim, vocab, context_alpha=context_alpha)


@pytest.fixture
def unit_idf() -> FixedIdf:
    return FixedIdf({}, default=1.0)
