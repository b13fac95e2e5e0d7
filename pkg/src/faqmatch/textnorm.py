"""Deterministic tokenization and rule-based sentence splitting.

Every stage of the engine shares this normalization so that IDF tables,
encoder vocabularies, and evaluation all see the same tokens.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from importlib import resources
from typing import Collection, Iterable

# Runs of letters/digits; underscore and all punctuation are boundaries.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

_TERMINALS = ".!?"

# Trailing dotted word (e.g. "Dr", "e.g", "U.S.A") immediately before a period.
_WORD_BEFORE_RE = re.compile(r"[\w.]*\w$")


def tokenize(text: str) -> list[str]:
    """Split text into lowercase tokens.

    NFC-normalizes, lowercases, then takes maximal runs of letters and
    digits; punctuation and whitespace are dropped. Deterministic: the
    same input always yields the same token list.
    """
    if not text:
        return []
    text = unicodedata.normalize("NFC", text).lower()
    return _TOKEN_RE.findall(text)


@dataclass
class Sentence:
    """A sentence with its token list (always ``tokenize(text)``)."""

    text: str
    tokens: list[str]

    @classmethod
    def from_text(cls, text: str) -> "Sentence":
        return cls(text=text, tokens=tokenize(text))


def load_abbreviations(path: str) -> frozenset[str]:
    """Read an abbreviation list: one lowercase abbreviation per line, UTF-8.

    Blank lines and lines starting with ``#`` are ignored.
    """
    with open(path, encoding="utf-8") as fh:
        return _parse_abbreviations(fh)


def _parse_abbreviations(lines: Iterable[str]) -> frozenset[str]:
    out = set()
    for raw in lines:
        line = raw.strip()
        if line and not line.startswith("#"):
            out.add(line.lower().rstrip("."))
    return frozenset(out)


def _default_abbreviations() -> frozenset[str]:
    text = resources.files("faqmatch").joinpath("data/abbreviations.txt").read_text("utf-8")
    return _parse_abbreviations(text.splitlines())


DEFAULT_ABBREVIATIONS = _default_abbreviations()


def _preceding_word(text: str, index: int) -> str:
    """The dotted word directly before ``text[index]``, lowercased."""
    m = _WORD_BEFORE_RE.search(text, 0, index)
    return m.group(0).lower() if m else ""


def split_sentences(text: str, abbreviations: Collection[str] | None = None) -> list[Sentence]:
    """Split text into sentences on '.', '!', '?' boundaries.

    A terminal character (or run of them) ends a sentence when followed by
    whitespace and an uppercase letter, or by end of text. A single period
    directly after a known abbreviation never splits. Every input character
    lands in exactly one sentence or in inter-sentence whitespace.
    """
    if abbreviations is None:
        abbrevs = DEFAULT_ABBREVIATIONS
    else:
        abbrevs = {a.lower().rstrip(".") for a in abbreviations}

    sentences: list[Sentence] = []

    def emit(segment: str) -> None:
        stripped = segment.strip()
        if stripped:
            sentences.append(Sentence.from_text(stripped))

    n = len(text)
    start = 0
    i = 0
    while i < n:
        if text[i] not in _TERMINALS:
            i += 1
            continue
        j = i
        while j + 1 < n and text[j + 1] in _TERMINALS:
            j += 1
        if j == i and text[i] == "." and _preceding_word(text, i) in abbrevs:
            i += 1
            continue
        k = j + 1
        while k < n and text[k].isspace():
            k += 1
        if k == n:
            emit(text[start : j + 1])
            start = k
            break
        if k > j + 1 and text[k].isupper():
            emit(text[start : j + 1])
            start = k
            i = k
        else:
            i = j + 1
    if start < n:
        emit(text[start:])
    return sentences
