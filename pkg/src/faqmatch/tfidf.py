"""TF-IDF statistics and exact top-k dot-product ranking.

This is the cheap first retrieval stage: questions become L2-normalized
sparse vectors of unigram (and optionally bigram) weights, so a dot
product is a cosine and candidate filtering is a single sparse matvec.

The smoothed IDF ``ln((1 + n_docs) / (1 + doc_freq)) + 1`` keeps every
weight strictly positive and doubles as the per-word weight used by the
semantic similarity stage.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import CorruptFile, EmptyCorpus, VersionMismatch

FORMAT_VERSION = 1


def ngrams(tokens: list[str], ngram_max: int) -> list[str]:
    """Unigram terms, plus space-joined bigrams when ngram_max == 2."""
    if ngram_max <= 1 or len(tokens) < 2:
        return list(tokens)
    return list(tokens) + [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]


@dataclass
class TfidfModel:
    """Fitted vocabulary, document frequencies, and derived IDF weights.

    Immutable after fit; safe to share across threads.
    """

    vocab: dict[str, int]
    doc_freq: np.ndarray  # indexed by term id
    n_docs: int
    ngram_max: int = 2
    idf: np.ndarray = field(init=False, repr=False)
    min_idf: float = field(init=False)

    def __post_init__(self) -> None:
        self.doc_freq = np.asarray(self.doc_freq, dtype=np.int64)
        self.idf = np.log((1.0 + self.n_docs) / (1.0 + self.doc_freq)) + 1.0
        self.min_idf = float(self.idf.min()) if self.idf.size else 1.0

    def __len__(self) -> int:
        return len(self.vocab)

    def token_weight(self, token: str) -> float:
        """IDF of an in-vocabulary token; the minimum IDF for unseen ones."""
        tid = self.vocab.get(token)
        return float(self.idf[tid]) if tid is not None else self.min_idf


@dataclass
class SparseVector:
    """L2-normalized sparse term-weight vector; ids strictly increasing."""

    ids: np.ndarray
    weights: np.ndarray

    @property
    def nnz(self) -> int:
        return int(self.ids.size)

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.weights, self.weights)))

    def dot(self, other: "SparseVector") -> float:
        common, ia, ib = np.intersect1d(self.ids, other.ids, assume_unique=True, return_indices=True)
        if common.size == 0:
            return 0.0
        return float(np.dot(self.weights[ia], other.weights[ib]))


def fit(corpus: list[list[str]], ngram_max: int = 2) -> TfidfModel:
    """Fit document frequencies over a corpus of token lists.

    Vocabulary ids are assigned in sorted term order, so fitting is
    deterministic regardless of input ordering quirks.
    """
    if not corpus:
        raise EmptyCorpus("cannot fit TF-IDF on an empty corpus")
    df: dict[str, int] = {}
    for tokens in corpus:
        for term in set(ngrams(tokens, ngram_max)):
            df[term] = df.get(term, 0) + 1
    terms = sorted(df)
    vocab = {term: tid for tid, term in enumerate(terms)}
    doc_freq = np.array([df[term] for term in terms], dtype=np.int64)
    return TfidfModel(vocab=vocab, doc_freq=doc_freq, n_docs=len(corpus), ngram_max=ngram_max)


def transform(model: TfidfModel, tokens: list[str]) -> SparseVector:
    """tf * idf weights for in-vocabulary terms, L2-normalized.

    Out-of-vocabulary terms are ignored; all-OOV input yields the zero
    vector (norm 0).
    """
    counts: dict[int, int] = {}
    for term in ngrams(tokens, model.ngram_max):
        tid = model.vocab.get(term)
        if tid is not None:
            counts[tid] = counts.get(tid, 0) + 1
    if not counts:
        return SparseVector(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64))
    ids = np.fromiter(sorted(counts), dtype=np.int64, count=len(counts))
    weights = model.idf[ids] * np.array([counts[i] for i in ids], dtype=np.float64)
    norm = np.sqrt(np.dot(weights, weights))
    return SparseVector(ids, weights / norm)


def stack(vectors: list[SparseVector], width: int) -> sparse.csr_matrix:
    """Stack sparse vectors into one CSR matrix for batched scoring."""
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    for i, vec in enumerate(vectors):
        indptr[i + 1] = indptr[i] + vec.nnz
    indices = np.concatenate([v.ids for v in vectors]) if vectors else np.empty(0, dtype=np.int64)
    data = np.concatenate([v.weights for v in vectors]) if vectors else np.empty(0, dtype=np.float64)
    return sparse.csr_matrix((data, indices, indptr), shape=(len(vectors), width))


def top_k(
    model: TfidfModel,
    query: SparseVector,
    candidates: list[SparseVector] | sparse.csr_matrix,
    k: int,
) -> list[tuple[int, float]]:
    """The min(k, n) candidates with the largest dot products against query.

    Ordered by descending score, ties broken by ascending candidate index.
    Scores are cosines in [0, 1] because all vectors are unit-length with
    non-negative weights.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    matrix = candidates if sparse.issparse(candidates) else stack(candidates, len(model))
    n = matrix.shape[0]
    if n == 0:
        return []
    dense_query = np.zeros(matrix.shape[1], dtype=np.float64)
    if query.nnz:
        dense_query[query.ids] = query.weights
    scores = np.minimum(matrix @ dense_query, 1.0)
    take = min(k, n)
    # Full sort keeps the ascending-index tie-break exact even at the cut.
    order = np.lexsort((np.arange(n), -scores))
    return [(int(i), float(scores[i])) for i in order[:take]]


def save_model(model: TfidfModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def model_to_dict(model: TfidfModel) -> dict:
    return {
        "version": FORMAT_VERSION,
        "ngram_max": model.ngram_max,
        "n_docs": model.n_docs,
        "vocab": model.vocab,
        "doc_freq": model.doc_freq.tolist(),
    }


def model_from_dict(payload: dict) -> TfidfModel:
    try:
        version = payload["version"]
        if version != FORMAT_VERSION:
            raise VersionMismatch(f"expected format version {FORMAT_VERSION}, found {version}")
        return TfidfModel(
            vocab={str(k): int(v) for k, v in payload["vocab"].items()},
            doc_freq=np.array(payload["doc_freq"], dtype=np.int64),
            n_docs=int(payload["n_docs"]),
            ngram_max=int(payload["ngram_max"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFile(f"invalid TF-IDF model payload: {exc}") from exc


def load_model(path: str) -> TfidfModel:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CorruptFile(f"{path}: {exc}") from exc
    return model_from_dict(payload)
