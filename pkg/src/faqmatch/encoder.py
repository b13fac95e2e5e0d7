"""Lightweight trainable token embedder.

A learned per-token table with optional one-neighbor context mixing:

    vector_i = (1 - alpha) * table[tok_i] + alpha * mean(table[tok_{i-1}], table[tok_{i+1}])

Missing neighbors are dropped from the mean; a single-token input gets its
raw table row. Every output is a linear function of table rows with fixed
coefficients, which keeps the similarity gradients exact and hand-derivable.
Out-of-vocabulary tokens share one trainable UNK row.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, MalformedLine

UNK_TOKEN = "<unk>"


@dataclass
class EncoderParams:
    """Trainable embedding state: vocabulary, table, and mixing weight.

    ``table`` has ``len(vocab) + 1`` rows; the final row embeds unknown
    tokens. ``tokens_by_row`` records row order for exact file round-trips.
    """

    dim: int
    vocab: dict[str, int]
    table: np.ndarray
    context_alpha: float = 0.0
    tokens_by_row: list[str] = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise DimensionMismatch(f"embedding dim must be >= 2, got {self.dim}")
        if not 0.0 <= self.context_alpha <= 1.0:
            raise ValueError("context_alpha must lie in [0, 1]")
        if self.table.shape != (len(self.vocab) + 1, self.dim):
            raise DimensionMismatch(
                f"table shape {self.table.shape} does not match vocab {len(self.vocab)} + UNK, dim {self.dim}"
            )
        if not self.tokens_by_row:
            ordered = sorted(self.vocab, key=self.vocab.get)
            self.tokens_by_row = ordered

    @property
    def unk_row(self) -> int:
        return len(self.vocab)

    def row_ids(self, tokens: Sequence[str]) -> np.ndarray:
        unk = self.unk_row
        return np.fromiter((self.vocab.get(t, unk) for t in tokens), dtype=np.int64, count=len(tokens))

    def copy(self) -> "EncoderParams":
        return EncoderParams(
            dim=self.dim,
            vocab=dict(self.vocab),
            table=self.table.copy(),
            context_alpha=self.context_alpha,
            tokens_by_row=list(self.tokens_by_row),
        )


def init_params(
    seed: int,
    dim: int,
    vocab: Iterable[str],
    context_alpha: float = 0.0,
) -> EncoderParams:
    """Seeded uniform [-0.1, 0.1] init over the sorted vocabulary plus UNK.

    Small symmetric rows keep initial cosines near zero, i.e. no token pair
    starts out looking related.
    """
    tokens = sorted(set(vocab))
    rng = np.random.default_rng(seed)
    table = rng.uniform(-0.1, 0.1, size=(len(tokens) + 1, dim))
    return EncoderParams(
        dim=dim,
        vocab={t: i for i, t in enumerate(tokens)},
        table=table,
        context_alpha=context_alpha,
        tokens_by_row=tokens,
    )


def encode(params: EncoderParams, tokens: Sequence[str]) -> np.ndarray:
    """Embed tokens as a (len(tokens), dim) array."""
    if not tokens:
        return np.empty((0, params.dim), dtype=np.float64)
    rows = params.table[params.row_ids(tokens)]
    alpha = params.context_alpha
    if alpha == 0.0 or len(tokens) < 2:
        return rows.copy()
    neighbor_mean = np.empty_like(rows)
    neighbor_mean[0] = rows[1]
    neighbor_mean[-1] = rows[-2]
    if len(tokens) > 2:
        neighbor_mean[1:-1] = 0.5 * (rows[:-2] + rows[2:])
    return (1.0 - alpha) * rows + alpha * neighbor_mean


def encode_coefficients(params: EncoderParams, tokens: Sequence[str]) -> list[dict[int, float]]:
    """Per-position table-row coefficients such that
    ``encode(params, tokens)[i] == sum(coeff * table[row])``.

    This is the linear structure the analytic gradients chain through.
    """
    ids = params.row_ids(tokens)
    alpha = params.context_alpha
    out: list[dict[int, float]] = []
    n = len(ids)
    for i in range(n):
        coeffs: dict[int, float] = {}
        neighbors = [j for j in (i - 1, i + 1) if 0 <= j < n]
        if alpha == 0.0 or not neighbors:
            coeffs[int(ids[i])] = coeffs.get(int(ids[i]), 0.0) + 1.0
        else:
            coeffs[int(ids[i])] = (1.0 - alpha)
            share = alpha / len(neighbors)
            for j in neighbors:
                row = int(ids[j])
                coeffs[row] = coeffs.get(row, 0.0) + share
        out.append(coeffs)
    return out


def save_params(params: EncoderParams, path: str) -> None:
    """Write params in word-vector text format.

    Header is ``<count> <dim> <alpha>``; each following line is a token and
    its row values. The UNK row is written last under the reserved token
    ``<unk>`` (it can never collide with a real token, which is always
    punctuation-free). Floats use shortest round-trip repr, so
    load -> save is byte-identical.
    """
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(params.vocab) + 1} {params.dim} {params.context_alpha!r}\n")
        for token in params.tokens_by_row:
            row = params.table[params.vocab[token]]
            fh.write(token + " " + " ".join(repr(v) for v in row.tolist()) + "\n")
        unk = params.table[params.unk_row]
        fh.write(UNK_TOKEN + " " + " ".join(repr(v) for v in unk.tolist()) + "\n")


def load_static_embeddings(path: str) -> EncoderParams:
    """Load a word-vector text file: ``<count> <dim> [<alpha>]`` then one
    ``<word> <v1> ... <vd>`` line per word.

    Words absent from the file fall back to the UNK row (all zeros unless
    the file provides a ``<unk>`` line). Mixing weight defaults to 0.
    """
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) not in (2, 3):
            raise MalformedLine(1, f"expected '<count> <dim> [<alpha>]', got {header.strip()!r}")
        try:
            count, dim = int(parts[0]), int(parts[1])
            alpha = float(parts[2]) if len(parts) == 3 else 0.0
        except ValueError as exc:
            raise MalformedLine(1, str(exc)) from exc
        if dim < 2:
            raise DimensionMismatch(f"embedding dim must be >= 2, got {dim}")

        vocab: dict[str, int] = {}
        tokens_by_row: list[str] = []
        rows: list[np.ndarray] = []
        unk_row: np.ndarray | None = None
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            fields = line.split()
            if len(fields) != dim + 1:
                raise MalformedLine(line_no, f"expected {dim + 1} fields, got {len(fields)}")
            word = fields[0]
            try:
                values = np.array([float(v) for v in fields[1:]], dtype=np.float64)
            except ValueError as exc:
                raise MalformedLine(line_no, str(exc)) from exc
            if word == UNK_TOKEN:
                unk_row = values
                continue
            if word in vocab:
                raise MalformedLine(line_no, f"duplicate word {word!r}")
            vocab[word] = len(rows)
            tokens_by_row.append(word)
            rows.append(values)

    loaded = len(rows) + (1 if unk_row is not None else 0)
    if loaded != count:
        raise MalformedLine(1, f"header declares {count} vectors, file holds {loaded}")
    table = np.vstack(rows + [unk_row if unk_row is not None else np.zeros(dim)])
    return EncoderParams(
        dim=dim,
        vocab=vocab,
        table=table,
        context_alpha=alpha,
        tokens_by_row=tokens_by_row,
    )
