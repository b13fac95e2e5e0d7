"""Summary generation over CHQ batches.

Two backends share one contract (order and count preserved, summaries
truncated to ``max_len`` whitespace tokens):

* ``lead`` - deterministic extractive baseline: the first sentence of the
  CHQ. Needs no model download, so tests and air-gapped runs work.
* any other name - a pretrained seq2seq checkpoint loaded through
  transformers, greedy decoding by default. A checkpoint that cannot be
  loaded is fatal; a single record that fails to generate falls back to
  its leading sentence and is flagged.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from typing import Callable, Iterator

log = logging.getLogger(__name__)

LEAD_MODEL = "lead"

_SENTENCE_END_RE = re.compile(r"(?<=[.!?])\s+")


class AdapterError(Exception):
    """Invalid input or an unusable model (CLI exit code 1)."""


@dataclass
class SummaryRecord:
    id: str
    chq: str
    summary: str
    fallback: bool = False

    def to_json(self) -> str:
        payload = {"id": self.id, "chq": self.chq, "summary": self.summary}
        if self.fallback:
            payload["fallback"] = True
        return json.dumps(payload, ensure_ascii=False)


def _truncate(text: str, max_len: int) -> str:
    words = text.split()
    return " ".join(words[:max_len])


def lead_summary(chq: str, max_len: int) -> str:
    """First sentence of the CHQ, capped at max_len whitespace tokens."""
    first = _SENTENCE_END_RE.split(chq.strip(), maxsplit=1)[0]
    return _truncate(first, max_len)


def _load_seq2seq(model_name: str, max_len: int, beams: int) -> Callable[[str], str]:
    try:
        from transformers import AutoModelForSeq2SeqLM, AutoTokenizer
    except ImportError as exc:
        raise AdapterError(f"transformers is required for model {model_name!r}: {exc}") from exc
    try:
        tokenizer = AutoTokenizer.from_pretrained(model_name)
        model = AutoModelForSeq2SeqLM.from_pretrained(model_name)
    except Exception as exc:
        raise AdapterError(f"cannot load checkpoint {model_name!r}: {exc}") from exc
    model.eval()

    def generate(chq: str) -> str:
        inputs = tokenizer(chq, return_tensors="pt", truncation=True, max_length=1024)
        output_ids = model.generate(
            **inputs,
            max_new_tokens=max(8, 2 * max_len),
            num_beams=beams,
            do_sample=False,
        )
        return tokenizer.decode(output_ids[0], skip_special_tokens=True).strip()

    return generate


def read_chq_records(path: str) -> Iterator[tuple[str, str]]:
    """Yield (id, chq) pairs; blank lines are skipped."""
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise AdapterError(f"{path}:{line_no}: {exc}") from exc
            record_id = raw.get("id")
            chq = raw.get("chq")
            if not isinstance(record_id, (str, int)) or record_id == "":
                raise AdapterError(f"{path}:{line_no}: missing 'id'")
            if not isinstance(chq, str) or not chq.strip():
                raise AdapterError(f"{path}:{line_no}: record {record_id!r} has an empty 'chq'")
            yield str(record_id), chq


def summarize_file(
    in_path: str,
    out_path: str,
    model_name: str = LEAD_MODEL,
    max_len: int = 32,
    beams: int = 1,
) -> int:
    """Write one summary record per input record, same order.

    Returns the number of records written. An empty input file yields an
    empty output file.
    """
    if max_len < 1:
        raise AdapterError("max_len must be >= 1")
    if model_name == LEAD_MODEL:
        generate = lambda chq: lead_summary(chq, max_len)
    else:
        generate = _load_seq2seq(model_name, max_len, beams)

    written = 0
    with open(out_path, "w", encoding="utf-8") as out:
        for record_id, chq in read_chq_records(in_path):
            fallback = False
            try:
                summary = _truncate(generate(chq), max_len)
            except Exception as exc:
                log.warning("record %s: generation failed (%s); using leading sentence", record_id, exc)
                summary = ""
            if not summary:
                summary = lead_summary(chq, max_len)
                fallback = model_name != LEAD_MODEL
            out.write(SummaryRecord(record_id, chq, summary, fallback).to_json() + "\n")
            written += 1
    return written
