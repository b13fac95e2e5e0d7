"""End-to-end inference: two-stage question matching, then sentence selection.

Stage 1 filters the knowledge base down to the k best TF-IDF candidates;
stage 2 re-ranks that pool with the semantic similarity score and picks the
winner. Answer selection scores every sentence of the winning document and
returns the top n in document order.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

from . import tfidf
from .encoder import EncoderParams
from .errors import EmptyAnswerDoc, EmptyKnowledgeBase, EmptyQuery
from .kb import KnowledgeBase
from .similarity import IdfSource, relu_sim, sim
from .textnorm import Sentence, tokenize


@dataclass
class CandidateScore:
    faq_id: str
    tfidf_score: float
    sim_score: float


@dataclass
class MatchResult:
    """Winning FAQ plus the full stage-1 candidate pool with both scores."""

    matched_id: str
    matched_score: float
    candidates: list[CandidateScore]


@dataclass
class SelectedSentence:
    index: int
    text: str
    score: float


@dataclass
class AnswerSelection:
    """Up to n sentences in document order, plus every sentence's score."""

    selected: list[SelectedSentence]
    all_scores: list[float]


@dataclass
class PipelineAnswer:
    match: MatchResult
    selection: AnswerSelection
    timing_ms: dict[str, float]


def match_question(
    kb: KnowledgeBase,
    query_tokens: Sequence[str],
    params: EncoderParams,
    k: int = 32,
) -> MatchResult:
    """Find the knowledge-base FAQ most similar to the query.

    The winner maximizes semantic similarity over the TF-IDF top-k pool;
    ties go to the lowest knowledge-base entry index.
    """
    if len(kb) == 0:
        raise EmptyKnowledgeBase("knowledge base has no entries")
    if not query_tokens:
        raise EmptyQuery("query has no tokens")
    if k < 1:
        raise ValueError("k must be >= 1")
    query_vec = tfidf.transform(kb.tfidf, list(query_tokens))
    pool = tfidf.top_k(kb.tfidf, query_vec, kb.matrix(), k)

    candidates: list[CandidateScore] = []
    best_index = -1
    best_sim = float("-inf")
    for entry_index, tfidf_score in pool:
        entry = kb.entries[entry_index]
        sim_score = sim(query_tokens, entry.question.tokens, params, kb.tfidf)
        candidates.append(CandidateScore(entry.id, tfidf_score, sim_score))
        if sim_score > best_sim or (sim_score == best_sim and entry_index < best_index):
            best_sim = sim_score
            best_index = entry_index
    if best_index < 0:  # every sim was NaN (non-finite params); fall back deterministically
        best_index = pool[0][0]
        best_sim = candidates[0].sim_score
    return MatchResult(
        matched_id=kb.entries[best_index].id,
        matched_score=best_sim,
        candidates=candidates,
    )


def select_answers(
    answer_doc: Sequence[Sentence],
    query_tokens: Sequence[str],
    params: EncoderParams,
    idf_source: IdfSource,
    n: int = 3,
) -> AnswerSelection:
    """Pick the min(n, |doc|) highest-relevance sentences, in document order.

    Score ties prefer the earlier sentence. Sentences with no tokens (pure
    punctuation survivors) score 0 instead of failing.
    """
    if not answer_doc:
        raise EmptyAnswerDoc("answer document has no sentences")
    if not query_tokens:
        raise EmptyQuery("query has no tokens")
    if n < 1:
        raise ValueError("n must be >= 1")
    scores = [
        relu_sim(query_tokens, s.tokens, params, idf_source) if s.tokens else 0.0
        for s in answer_doc
    ]
    take = min(n, len(answer_doc))
    chosen = sorted(sorted(range(len(scores)), key=lambda i: (-scores[i], i))[:take])
    return AnswerSelection(
        selected=[SelectedSentence(i, answer_doc[i].text, scores[i]) for i in chosen],
        all_scores=scores,
    )


def answer(
    kb: KnowledgeBase,
    query_text: str,
    params: EncoderParams,
    k: int = 32,
    n: int = 3,
) -> PipelineAnswer:
    """Tokenize, match, and select; wall-clock milliseconds per stage."""
    start = time.perf_counter()
    query_tokens = tokenize(query_text)
    if not query_tokens:
        raise EmptyQuery(f"query {query_text!r} has no tokens")
    match = match_question(kb, query_tokens, params, k)
    after_match = time.perf_counter()
    entry = kb.entry_by_id(match.matched_id)
    selection = select_answers(entry.answer_sentences, query_tokens, params, kb.tfidf, n)
    end = time.perf_counter()
    timing = {
        "match": (after_match - start) * 1000.0,
        "select": (end - after_match) * 1000.0,
        "total": (end - start) * 1000.0,
    }
    return PipelineAnswer(match=match, selection=selection, timing_ms=timing)
