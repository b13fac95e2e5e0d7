"""FAQ knowledge base: ingestion, validation, and persistence.

Records arrive as JSONL, one object per line::

    {"id": "q1", "question": "...", "answer": "..."}
    {"id": "q2", "question": "...", "answer_sentences": ["...", "..."]}

Records with empty questions or answers are logged and skipped (noisy
sources are expected); duplicate ids abort, since neither copy can be
trusted.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Collection, Iterable, Iterator

from scipy import sparse

from . import tfidf
from .errors import CorruptFile, DuplicateId, EmptyAnswer, EmptyCorpus, EmptyQuestion, VersionMismatch
from .textnorm import Sentence, split_sentences, tokenize

log = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass
class FaqEntry:
    """One knowledge-base record: an FAQ and its answer document."""

    id: str
    question: Sentence
    answer_sentences: list[Sentence]
    source: str | None = None


@dataclass
class KnowledgeBase:
    """Immutable set of FAQ entries plus the fitted TF-IDF stage.

    ``question_vectors[i]`` is the TF-IDF vector of ``entries[i]``.
    """

    entries: list[FaqEntry]
    tfidf: tfidf.TfidfModel
    question_vectors: list[tfidf.SparseVector]
    _matrix: sparse.csr_matrix | None = field(default=None, repr=False, compare=False)
    _index_by_id: dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self._index_by_id:
            self._index_by_id = {e.id: i for i, e in enumerate(self.entries)}

    def __len__(self) -> int:
        return len(self.entries)

    def matrix(self) -> sparse.csr_matrix:
        """Stacked question vectors, built once and cached."""
        if self._matrix is None:
            self._matrix = tfidf.stack(self.question_vectors, len(self.tfidf))
        return self._matrix

    def entry_index(self, entry_id: str) -> int:
        return self._index_by_id[entry_id]

    def entry_by_id(self, entry_id: str) -> FaqEntry:
        return self.entries[self._index_by_id[entry_id]]


def _record_sentences(record: dict, abbreviations: Collection[str] | None) -> list[Sentence]:
    if "answer_sentences" in record and record["answer_sentences"] is not None:
        texts = [str(t) for t in record["answer_sentences"]]
        return [Sentence.from_text(t) for t in texts if t.strip()]
    answer = str(record.get("answer") or "")
    return split_sentences(answer, abbreviations)


def ingest(
    records: Iterable[dict],
    abbreviations: Collection[str] | None = None,
    ref_faqs: Iterable[str] | None = None,
    ngram_max: int = 2,
) -> KnowledgeBase:
    """Validate records, split answers into sentences, and fit TF-IDF.

    The TF-IDF corpus is every accepted entry question plus any reference
    FAQs supplied for fitting (they do not become entries). Returns a
    knowledge base whose entry order follows the input record order.
    """
    entries: list[FaqEntry] = []
    seen: set[str] = set()
    rejected = 0
    for position, record in enumerate(records):
        record_id = str(record.get("id") or f"record-{position}")
        if record_id in seen:
            raise DuplicateId(record_id)
        try:
            question = Sentence.from_text(str(record.get("question") or "").strip())
            if not question.tokens:
                raise EmptyQuestion(record_id)
            sentences = _record_sentences(record, abbreviations)
            if not sentences:
                raise EmptyAnswer(record_id)
        except (EmptyQuestion, EmptyAnswer) as exc:
            log.warning("skipping record: %s", exc)
            rejected += 1
            continue
        seen.add(record_id)
        entries.append(
            FaqEntry(
                id=record_id,
                question=question,
                answer_sentences=sentences,
                source=record.get("source"),
            )
        )
    if not entries:
        raise EmptyCorpus("no valid records to ingest")
    if rejected:
        log.info("ingest rejected %d record(s)", rejected)

    corpus = [entry.question.tokens for entry in entries]
    if ref_faqs is not None:
        corpus.extend(tokenize(text) for text in ref_faqs)
    model = tfidf.fit(corpus, ngram_max=ngram_max)
    vectors = [tfidf.transform(model, entry.question.tokens) for entry in entries]
    return KnowledgeBase(entries=entries, tfidf=model, question_vectors=vectors)


def read_jsonl(path: str) -> Iterator[dict]:
    """Stream JSON objects from a JSONL file, skipping blank lines."""
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorruptFile(f"{path}:{line_no}: {exc}") from exc


def save(kb: KnowledgeBase, path: str) -> None:
    """Persist the knowledge base as one canonical JSON document.

    Re-saving a loaded knowledge base is byte-identical: only entry texts
    and fitted counts are stored, never derived floats.
    """
    payload = {
        "version": FORMAT_VERSION,
        "tfidf": tfidf.model_to_dict(kb.tfidf),
        "entries": [
            {
                "id": entry.id,
                "question": entry.question.text,
                "answer_sentences": [s.text for s in entry.answer_sentences],
                "source": entry.source,
            }
            for entry in kb.entries
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def load(path: str) -> KnowledgeBase:
    """Load a knowledge base written by :func:`save`.

    Question vectors are recomputed from the stored model, which keeps the
    file small and guarantees they match the fitted statistics.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CorruptFile(f"{path}: {exc}") from exc
    try:
        version = payload["version"]
        if version != FORMAT_VERSION:
            raise VersionMismatch(f"expected index version {FORMAT_VERSION}, found {version}")
        model = tfidf.model_from_dict(payload["tfidf"])
        entries = [
            FaqEntry(
                id=str(raw["id"]),
                question=Sentence.from_text(str(raw["question"])),
                answer_sentences=[Sentence.from_text(str(t)) for t in raw["answer_sentences"]],
                source=raw.get("source"),
            )
            for raw in payload["entries"]
        ]
    except (KeyError, TypeError) as exc:
        raise CorruptFile(f"{path}: missing or invalid field: {exc}") from exc
    vectors = [tfidf.transform(model, entry.question.tokens) for entry in entries]
    return KnowledgeBase(entries=entries, tfidf=model, question_vectors=vectors)
