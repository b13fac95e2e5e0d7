"""Self-supervised relevance losses and encoder training.

Three losses share the encoder parameters:

* matching loss   ``1 - relu(sim(ref, matched))`` pulls the reference FAQ
  and its knowledge-base match together;
* similarity loss ``sum S * (1 - S)`` pushes per-sentence relevance scores
  to the binary extremes;
* selection loss  ``|min(n, |A|) - sum S|`` keeps the number of relevant
  sentences at n.

The combined objective is
``l_sum + match_weight * l_mat + answer_weight * (l_sim + l_sel)`` where
``l_sum`` is an externally supplied summarization loss (default 0; no
seq2seq decoder ships here).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .encoder import EncoderParams
from .errors import NonFiniteLoss, ScoreOutOfRange, ValidationError
from .kb import KnowledgeBase
from .similarity import IdfSource, accumulate_grad, relu_sim, sim, sim_grad

_RANGE_TOL = 1e-9


@dataclass
class LossWeights:
    """Objective weights; ``n_select`` is the fixed sentence budget."""

    match_weight: float = 0.01
    answer_weight: float = 0.01
    n_select: int = 3

    def __post_init__(self) -> None:
        if self.match_weight < 0 or self.answer_weight < 0:
            raise ValidationError("loss weights must be >= 0")
        if self.n_select < 1:
            raise ValidationError("n_select must be >= 1")


@dataclass
class LossBreakdown:
    l_sum: float
    l_mat: float
    l_sim: float
    l_sel: float
    total: float


def _check_scores(scores: Sequence[float]) -> None:
    for s in scores:
        if not (-_RANGE_TOL <= s <= 1.0 + _RANGE_TOL):
            raise ScoreOutOfRange(f"relevance score {s} outside [0, 1]")


def loss_mat(
    ref_tokens: Sequence[str],
    matched_tokens: Sequence[str],
    params: EncoderParams,
    idf_source: IdfSource,
) -> float:
    """1 - relu(sim(ref, matched)); 0 at a perfect match, 1 when unrelated."""
    return 1.0 - relu_sim(ref_tokens, matched_tokens, params, idf_source)


def loss_sim(scores: Sequence[float]) -> float:
    """sum S * (1 - S); zero exactly when every score is 0 or 1."""
    _check_scores(scores)
    return float(sum(s * (1.0 - s) for s in scores))


def loss_sel(scores: Sequence[float], n: int) -> float:
    """|min(n, |A|) - sum S|; zero when the scores budget exactly n sentences."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    _check_scores(scores)
    return float(abs(min(n, len(scores)) - sum(scores)))


def answer_scores(
    ref_tokens: Sequence[str],
    answer_token_lists: Sequence[Sequence[str]],
    params: EncoderParams,
    idf_source: IdfSource,
) -> list[float]:
    """Per-sentence relevance scores; token-less sentences score 0."""
    return [
        relu_sim(ref_tokens, toks, params, idf_source) if toks else 0.0
        for toks in answer_token_lists
    ]


def total_loss(
    l_sum_external: float,
    ref_tokens: Sequence[str],
    matched_tokens: Sequence[str],
    answer_token_lists: Sequence[Sequence[str]],
    params: EncoderParams,
    idf_source: IdfSource,
    weights: LossWeights,
) -> LossBreakdown:
    """Assemble the full objective from current parameters."""
    if l_sum_external < 0:
        raise ValidationError("external summarization loss must be >= 0")
    l_mat = loss_mat(ref_tokens, matched_tokens, params, idf_source)
    scores = answer_scores(ref_tokens, answer_token_lists, params, idf_source)
    l_sim = loss_sim(scores)
    l_sel = loss_sel(scores, weights.n_select)
    total = l_sum_external + weights.match_weight * l_mat + weights.answer_weight * (l_sim + l_sel)
    return LossBreakdown(l_sum=l_sum_external, l_mat=l_mat, l_sim=l_sim, l_sel=l_sel, total=total)


def loss_grad(
    ref_tokens: Sequence[str],
    matched_tokens: Sequence[str],
    answer_token_lists: Sequence[Sequence[str]],
    params: EncoderParams,
    idf_source: IdfSource,
    weights: LossWeights,
) -> dict[int, np.ndarray]:
    """Gradient of ``match_weight * l_mat + answer_weight * (l_sim + l_sel)``
    w.r.t. touched encoder rows.

    ReLU takes subgradient 0 at the kink; so does the absolute value in the
    selection loss when the score sum sits exactly on the budget.
    """
    grad: dict[int, np.ndarray] = {}

    s_mat = sim(ref_tokens, matched_tokens, params, idf_source)
    if weights.match_weight != 0.0 and s_mat > 0.0:
        accumulate_grad(grad, sim_grad(ref_tokens, matched_tokens, params, idf_source), -weights.match_weight)

    if weights.answer_weight == 0.0:
        return grad

    raw = [sim(ref_tokens, toks, params, idf_source) if toks else None for toks in answer_token_lists]
    scores = [max(0.0, s) if s is not None else 0.0 for s in raw]
    budget_gap = min(weights.n_select, len(scores)) - sum(scores)
    sel_sign = math.copysign(1.0, budget_gap) if budget_gap != 0.0 else 0.0
    for s, toks in zip(raw, answer_token_lists):
        if s is None or s <= 0.0:
            continue
        # d[S(1-S)]/dS = 1 - 2S ; d|gap|/dS = -sign(gap)
        factor = weights.answer_weight * ((1.0 - 2.0 * s) - sel_sign)
        if factor != 0.0:
            accumulate_grad(grad, sim_grad(ref_tokens, toks, params, idf_source), factor)
    return grad


@dataclass
class EpochStats:
    epoch: int
    mean_total: float
    mean_mat: float
    mean_sim: float
    mean_sel: float


def write_loss_log(stats: Sequence[EpochStats], path: str) -> None:
    """CSV loss log: epoch,mean_total,mean_mat,mean_sim,mean_sel."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "mean_total", "mean_mat", "mean_sim", "mean_sel"])
        for row in stats:
            writer.writerow([row.epoch, row.mean_total, row.mean_mat, row.mean_sim, row.mean_sel])


def train_encoder(
    pairs: Sequence[tuple[Sequence[str], Sequence[str]]],
    kb: KnowledgeBase,
    params: EncoderParams,
    weights: LossWeights,
    epochs: int,
    learning_rate: float = 0.05,
    seed: int = 0,
    k: int = 32,
) -> tuple[EncoderParams, list[EpochStats]]:
    """Plain SGD over (CHQ tokens, reference FAQ tokens) pairs.

    Each step re-matches the reference FAQ against the knowledge base with
    the current parameters, then descends the combined loss. The CHQ side
    of a pair is carried for bookkeeping only; training always matches and
    scores with the reference FAQ. Deterministic for a fixed seed. The
    input params are not mutated.
    """
    from .pipeline import match_question  # local import avoids a cycle

    if not pairs:
        raise ValidationError("training requires at least one pair")
    trained = params.copy()
    rng = np.random.default_rng(seed)
    log: list[EpochStats] = []
    for epoch in range(1, epochs + 1):
        order = rng.permutation(len(pairs))
        sums = np.zeros(4)
        for pair_index in order:
            _, ref_tokens = pairs[pair_index]
            match = match_question(kb, list(ref_tokens), trained, k=k)
            entry = kb.entry_by_id(match.matched_id)
            answers = [s.tokens for s in entry.answer_sentences]
            try:
                breakdown = total_loss(
                    0.0, ref_tokens, entry.question.tokens, answers, trained, kb.tfidf, weights
                )
            except ScoreOutOfRange as exc:  # NaN relevance score from diverged params
                raise NonFiniteLoss(int(pair_index)) from exc
            if not math.isfinite(breakdown.total):
                raise NonFiniteLoss(int(pair_index))
            grad = loss_grad(ref_tokens, entry.question.tokens, answers, trained, kb.tfidf, weights)
            for row, vec in grad.items():
                trained.table[row] -= learning_rate * vec
            sums += (breakdown.total, breakdown.l_mat, breakdown.l_sim, breakdown.l_sel)
        means = sums / len(pairs)
        log.append(EpochStats(epoch, *means.tolist()))
    return trained, log
