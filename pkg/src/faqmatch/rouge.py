"""ROUGE-1/2/L F1 for comparing generated summaries against references.

R1/R2 use clipped n-gram overlap counts; RL uses longest common
subsequence. All three report plain F1 (harmonic mean), with 0 whenever a
denominator vanishes. Tokenization is the engine-wide lowercased,
punctuation-stripped tokenizer.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .errors import EmptyReference, LineCountMismatch
from .textnorm import tokenize


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _clipped_overlap_f1(cand: Sequence[str], ref: Sequence[str], n: int) -> float:
    cand_counts = _ngram_counts(cand, n)
    ref_counts = _ngram_counts(ref, n)
    cand_total = sum(cand_counts.values())
    ref_total = sum(ref_counts.values())
    if cand_total == 0 or ref_total == 0:
        return 0.0
    overlap = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
    return _f1(overlap / cand_total, overlap / ref_total)


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length, O(len(a) * len(b))."""
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for token_a in a:
        current = [0]
        for j, token_b in enumerate(b, start=1):
            if token_a == token_b:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


def rouge_f1(candidate_tokens: Sequence[str], reference_tokens: Sequence[str]) -> tuple[float, float, float]:
    """(ROUGE-1, ROUGE-2, ROUGE-L) F1 scores in [0, 1]."""
    if not reference_tokens:
        raise EmptyReference("reference has no tokens")
    r1 = _clipped_overlap_f1(candidate_tokens, reference_tokens, 1)
    r2 = _clipped_overlap_f1(candidate_tokens, reference_tokens, 2)
    if candidate_tokens:
        lcs = lcs_length(candidate_tokens, reference_tokens)
        rl = _f1(lcs / len(candidate_tokens), lcs / len(reference_tokens))
    else:
        rl = 0.0
    return r1, r2, rl


@dataclass
class RougeReport:
    """Corpus scores are unweighted means of per-example F1 values."""

    r1_f1: float
    r2_f1: float
    rl_f1: float
    per_example: list[tuple[float, float, float]]

    @property
    def n_examples(self) -> int:
        return len(self.per_example)

    def to_json(self) -> str:
        return json.dumps(
            {"r1": self.r1_f1, "r2": self.r2_f1, "rl": self.rl_f1, "n_examples": self.n_examples}
        )


def eval_texts(predictions: Sequence[str], references: Sequence[str]) -> RougeReport:
    if len(predictions) != len(references):
        raise LineCountMismatch(
            f"{len(predictions)} prediction(s) vs {len(references)} reference(s)"
        )
    per_example = [rouge_f1(tokenize(p), tokenize(r)) for p, r in zip(predictions, references)]
    if not per_example:
        return RougeReport(0.0, 0.0, 0.0, [])
    means = [sum(col) / len(per_example) for col in zip(*per_example)]
    return RougeReport(means[0], means[1], means[2], per_example)


def eval_file(pred_path: str, ref_path: str) -> RougeReport:
    """Score two line-aligned plain-text files (one example per line)."""
    with open(pred_path, encoding="utf-8") as fh:
        predictions = fh.read().splitlines()
    with open(ref_path, encoding="utf-8") as fh:
        references = fh.read().splitlines()
    return eval_texts(predictions, references)
