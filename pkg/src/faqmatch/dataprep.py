"""Knowledge-based filtering of question-summarization pairs.

Each (long question, reference FAQ) pair gets a matching score: the best
TF-IDF cosine between its reference FAQ and any knowledge-base question.
Pairs below a cutoff are rejected; survivors are shuffled and split
80/10/10 (remainder to train). The cutoff is chosen manually from a score
histogram, so no default is baked in.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from . import tfidf
from .errors import CorruptFile
from .kb import KnowledgeBase
from .textnorm import tokenize

SPLITS = ("train", "dev", "test", "rejected")


@dataclass
class QuestionPair:
    chq: str
    ref_faq: str
    match_score: float | None = None
    split: str | None = None


def build_filter_model(
    pairs: Sequence[QuestionPair],
    kb: KnowledgeBase,
) -> tuple[tfidf.TfidfModel, sparse.csr_matrix]:
    """Fit TF-IDF on the pairs' reference FAQs plus the KB questions, and
    vectorize the KB questions under that model."""
    corpus = [tokenize(p.ref_faq) for p in pairs]
    corpus.extend(entry.question.tokens for entry in kb.entries)
    model = tfidf.fit(corpus, ngram_max=kb.tfidf.ngram_max)
    vectors = [tfidf.transform(model, entry.question.tokens) for entry in kb.entries]
    return model, tfidf.stack(vectors, len(model))


def matching_score(
    pair: QuestionPair,
    model: tfidf.TfidfModel,
    kb_question_vectors: sparse.csr_matrix | list[tfidf.SparseVector],
) -> float:
    """Best TF-IDF cosine between the reference FAQ and any KB question."""
    matrix = (
        kb_question_vectors
        if sparse.issparse(kb_question_vectors)
        else tfidf.stack(kb_question_vectors, len(model))
    )
    vec = tfidf.transform(model, tokenize(pair.ref_faq))
    if vec.nnz == 0 or matrix.shape[0] == 0:
        return 0.0
    dense = np.zeros(matrix.shape[1], dtype=np.float64)
    dense[vec.ids] = vec.weights
    return float(np.clip((matrix @ dense).max(), 0.0, 1.0))


def score_pairs(
    pairs: Sequence[QuestionPair],
    model: tfidf.TfidfModel,
    kb_question_vectors: sparse.csr_matrix,
) -> None:
    for pair in pairs:
        pair.match_score = matching_score(pair, model, kb_question_vectors)


def filter_and_split(pairs: Sequence[QuestionPair], cutoff: float, seed: int = 0) -> list[QuestionPair]:
    """Reject pairs scoring below the cutoff; split survivors 80/10/10.

    Dev and test each get floor(10%) of the survivors; the remainder goes
    to train. Shuffling is seeded, so the assignment is reproducible.
    """
    if not 0.0 <= cutoff <= 1.0 + 1e-9:
        raise ValueError("cutoff must lie in [0, 1]")
    survivors: list[int] = []
    for i, pair in enumerate(pairs):
        if pair.match_score is None:
            raise ValueError(f"pair {i} has no match_score; score pairs before splitting")
        if pair.match_score < cutoff:
            pair.split = "rejected"
        else:
            survivors.append(i)
    rng = np.random.default_rng(seed)
    shuffled = [survivors[j] for j in rng.permutation(len(survivors))]
    n = len(shuffled)
    n_dev = n // 10
    n_test = n // 10
    n_train = n - n_dev - n_test
    for pos, i in enumerate(shuffled):
        if pos < n_train:
            pairs[i].split = "train"
        elif pos < n_train + n_dev:
            pairs[i].split = "dev"
        else:
            pairs[i].split = "test"
    return list(pairs)


def score_histogram(scores: Iterable[float], n_buckets: int = 20) -> list[tuple[float, float, int]]:
    """Counts over equal-width buckets of [0, 1]; 1.0 lands in the last."""
    counts = [0] * n_buckets
    for s in scores:
        bucket = min(int(s * n_buckets), n_buckets - 1)
        counts[bucket] += 1
    return [(b / n_buckets, (b + 1) / n_buckets, counts[b]) for b in range(n_buckets)]


def read_pairs(path: str) -> list[QuestionPair]:
    """Read pair JSONL: {"chq": str, "ref_faq": str} per line."""
    pairs: list[QuestionPair] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
                pairs.append(
                    QuestionPair(
                        chq=str(raw["chq"]),
                        ref_faq=str(raw["ref_faq"]),
                        match_score=raw.get("match_score"),
                        split=raw.get("split"),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorruptFile(f"{path}:{line_no}: {exc}") from exc
    return pairs


def write_pairs(pairs: Sequence[QuestionPair], path: str) -> None:
    """Write pair JSONL with match_score and split fields added."""
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(asdict(pair), ensure_ascii=False) + "\n")
