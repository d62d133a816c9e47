"""Vocabulary building and plain-text word embeddings."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

PAD = "<pad>"
UNK = "<unk>"
OOV_INIT_RANGE = 0.25


class EmbeddingLoadError(ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class PretrainedTable:
    vectors: dict[str, np.ndarray]
    dim: int

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def __getitem__(self, word: str) -> np.ndarray:
        return self.vectors[word]

    def __len__(self) -> int:
        return len(self.vectors)


def load_embeddings_text(stream: IO[str] | Iterable[str], expected_dim: int | None = None) -> PretrainedTable:
    """Read ``word v1 ... vd`` lines, with an optional ``count dim`` header line.

    The first occurrence of a duplicated word wins.
    """
    vectors: dict[str, np.ndarray] = {}
    dim = expected_dim
    first = True
    for lineno, raw in enumerate(stream, start=1):
        fields = raw.rstrip("\r\n").rstrip(" ").split(" ")
        if fields == [""]:
            continue
        if first:
            first = False
            if len(fields) == 2 and all(f.lstrip("-").isdigit() for f in fields):
                header_dim = int(fields[1])
                if expected_dim is not None and header_dim != expected_dim:
                    raise EmbeddingLoadError(f"header dimension {header_dim} != expected {expected_dim}", lineno)
                dim = header_dim
                continue
        word, values = fields[0], fields[1:]
        if dim is None:
            dim = len(values)
        if len(values) != dim:
            raise EmbeddingLoadError(f"expected {dim} values for {word!r}, found {len(values)}", lineno)
        try:
            vec = np.array([float(v) for v in values], dtype=np.float64)
        except ValueError:
            raise EmbeddingLoadError(f"non-numeric value in vector for {word!r}", lineno) from None
        if not np.all(np.isfinite(vec)):
            raise EmbeddingLoadError(f"non-finite value in vector for {word!r}", lineno)
        vectors.setdefault(word, vec)
    if dim is None or dim < 1:
        raise EmbeddingLoadError("no embedding vectors found")
    return PretrainedTable(vectors, dim)


def load_embeddings(path: str | Path, expected_dim: int | None = None) -> PretrainedTable:
    with open(path, encoding="utf-8", errors="strict") as fh:
        return load_embeddings_text(fh, expected_dim)


class Vocabulary:
    """Index over lowercased surfaces; index 0 is padding and 1 is unknown."""

    pad_index = 0
    unk_index = 1

    def __init__(self, words: Sequence[str]):
        words = list(words)
        if words[:2] != [PAD, UNK]:
            raise ValueError("vocabulary must start with <pad>, <unk>")
        if len(set(words)) != len(words):
            raise ValueError("vocabulary words must be unique")
        self.words = words
        self.index_of = {w: i for i, w in enumerate(words)}

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word.lower() in self.index_of

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.words == other.words

    def __repr__(self) -> str:
        return f"Vocabulary(size={len(self)})"

    def encode(self, tokens: Iterable[str]) -> list[int]:
        return [self.index_of.get(t.lower(), self.unk_index) for t in tokens]

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self.words[i] for i in ids]


def build_vocabulary(documents: Iterable[Iterable[str]], max_size: int = 15000) -> Vocabulary:
    """Most frequent lowercased surfaces, ties broken lexicographically.

    ``max_size`` counts the two special entries.
    """
    if max_size < 3:
        raise ValueError("max_size must be at least 3")
    counts = Counter(tok.lower() for doc in documents for tok in doc)
    counts.pop(PAD, None)
    counts.pop(UNK, None)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return Vocabulary([PAD, UNK] + [w for w, _ in ranked[: max_size - 2]])


def encode(tokens: Iterable[str], vocab: Vocabulary) -> list[int]:
    return vocab.encode(tokens)


def init_embedding_matrix(
    vocab: Vocabulary,
    table: PretrainedTable | None,
    seed: int,
    dim: int | None = None,
) -> np.ndarray:
    """Embedding matrix with pretrained rows copied and the rest drawn from U(-0.25, 0.25)."""
    if dim is None:
        if table is None:
            raise ValueError("dim is required when no pretrained table is given")
        dim = table.dim
    if table is not None and table.dim != dim:
        raise ValueError(f"pretrained dimension {table.dim} != model dimension {dim}")
    rng = np.random.default_rng(seed)
    matrix = rng.uniform(-OOV_INIT_RANGE, OOV_INIT_RANGE, size=(len(vocab), dim))
    if table is not None:
        for i, word in enumerate(vocab.words):
            if word in table.vectors:
                matrix[i] = table.vectors[word]
    matrix[vocab.pad_index] = 0.0
    return matrix
