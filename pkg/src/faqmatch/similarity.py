"""IDF-weighted greedy-match semantic similarity and its gradient.

The score is precision-style over the query side: each query token finds
its best cosine match among candidate tokens, and the matches are averaged
with IDF weights,

    sim(Q, C) = sum_q idf(q) * max_c cos(x_q, x_c) / sum_q idf(q)

so sim(a, b) != sim(b, a) in general. A ReLU of the same score serves as
the relevance score for answer sentences. Zero-norm embeddings get cosine
0 (no relation) rather than NaN; unseen words take the least informative
(minimum) IDF weight.
"""

from __future__ import annotations

import math
from typing import Protocol, Sequence

import numpy as np

from .encoder import EncoderParams, encode, encode_coefficients
from .errors import EmptyCandidate, EmptyQuery

ZERO_NORM_EPS = 1e-12


class IdfSource(Protocol):
    def token_weight(self, token: str) -> float: ...


def _unit_rows(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-normalized copy plus row norms; zero-norm rows stay zero."""
    norms = np.linalg.norm(matrix, axis=1)
    safe = np.where(norms < ZERO_NORM_EPS, 1.0, norms)
    return matrix / safe[:, None], norms


def _greedy_match(
    query_tokens: Sequence[str],
    cand_tokens: Sequence[str],
    params: EncoderParams,
    idf_source: IdfSource,
):
    if not query_tokens:
        raise EmptyQuery("query has no tokens")
    if not cand_tokens:
        raise EmptyCandidate("candidate has no tokens")
    x = encode(params, query_tokens)
    y = encode(params, cand_tokens)
    x_hat, x_norms = _unit_rows(x)
    y_hat, y_norms = _unit_rows(y)
    cosines = np.clip(x_hat @ y_hat.T, -1.0, 1.0)
    best = cosines.argmax(axis=1)  # first maximal index wins ties
    weights = np.array([idf_source.token_weight(t) for t in query_tokens], dtype=np.float64)
    return x_hat, x_norms, y_hat, y_norms, cosines, best, weights


def sim(
    query_tokens: Sequence[str],
    cand_tokens: Sequence[str],
    params: EncoderParams,
    idf_source: IdfSource,
) -> float:
    """Weighted greedy-match similarity in [-1, 1]."""
    _, _, _, _, cosines, best, weights = _greedy_match(query_tokens, cand_tokens, params, idf_source)
    matched = cosines[np.arange(len(best)), best]
    return float(np.dot(weights, matched) / weights.sum())


def relu_sim(
    query_tokens: Sequence[str],
    cand_tokens: Sequence[str],
    params: EncoderParams,
    idf_source: IdfSource,
) -> float:
    """Relevance score in [0, 1]: similarity clipped at zero.

    NaN (possible only with non-finite parameters) propagates instead of
    being masked, so training divergence is detectable.
    """
    value = sim(query_tokens, cand_tokens, params, idf_source)
    if math.isnan(value):
        return value
    return value if value > 0.0 else 0.0


def accumulate_grad(target: dict[int, np.ndarray], source: dict[int, np.ndarray], scale: float = 1.0) -> None:
    """target += scale * source, allocating rows on first touch."""
    for row, vec in source.items():
        if row in target:
            target[row] += scale * vec
        else:
            target[row] = scale * vec  # multiplication allocates a fresh array


def sim_grad(
    query_tokens: Sequence[str],
    cand_tokens: Sequence[str],
    params: EncoderParams,
    idf_source: IdfSource,
) -> dict[int, np.ndarray]:
    """Analytic gradient of :func:`sim` w.r.t. every touched table row.

    Subgradient conventions: at greedy-match ties the earliest candidate
    position carries the gradient (matching argmax), and zero-norm
    embeddings contribute nothing.
    """
    x_hat, x_norms, y_hat, y_norms, cosines, best, weights = _greedy_match(
        query_tokens, cand_tokens, params, idf_source
    )
    total_weight = weights.sum()
    q_coeffs = encode_coefficients(params, query_tokens)
    c_coeffs = encode_coefficients(params, cand_tokens)

    grad: dict[int, np.ndarray] = {}

    def add(row: int, vec: np.ndarray) -> None:
        if row in grad:
            grad[row] += vec
        else:
            grad[row] = vec.copy()

    for j in range(len(query_tokens)):
        if x_norms[j] < ZERO_NORM_EPS:
            continue
        m = int(best[j])
        if y_norms[m] < ZERO_NORM_EPS:
            continue
        cos_jm = cosines[j, m]
        scale = weights[j] / total_weight
        d_x = (y_hat[m] - cos_jm * x_hat[j]) / x_norms[j]
        d_y = (x_hat[j] - cos_jm * y_hat[m]) / y_norms[m]
        for row, coeff in q_coeffs[j].items():
            add(row, (scale * coeff) * d_x)
        for row, coeff in c_coeffs[m].items():
            add(row, (scale * coeff) * d_y)
    return grad
