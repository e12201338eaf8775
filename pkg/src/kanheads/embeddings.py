"""Sentence vectors: TF-IDF, pooled embedding tables, precomputed lookups.

Every embedder exposes ``dim``, ``embed(records) -> (n, dim)`` and
``params()``; trainable tables additionally implement ``backward``.
"""
from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, LookupFailure, ParseError
from .layers import Param

log = logging.getLogger(__name__)

UNK = "<unk>"


@dataclass
class Vocabulary:
    """Token index; real tokens occupy [0, n_tokens), UNK is the last index."""

    tokens: list[str]
    doc_freq: dict[str, int]
    n_docs: int
    max_size: int
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {t: i for i, t in enumerate(self.tokens)}

    @property
    def unk_index(self) -> int:
        return len(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens) + 1

    def __contains__(self, token) -> bool:
        return token in self.index or token == UNK

    def lookup(self, token: str) -> int:
        return self.index.get(token, self.unk_index)


def build_vocab(corpus, max_size: int = 8000) -> Vocabulary:
    """Top ``max_size`` tokens by document frequency.

    Ties go to higher total frequency, then lexicographic order.
    """
    corpus = [list(doc) for doc in corpus]
    if not corpus:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    if max_size < 0:
        raise ValueError("max_size must be >= 0")
    df = Counter()
    tf = Counter()
    for doc in corpus:
        tf.update(doc)
        df.update(set(doc))
    ranked = sorted(df, key=lambda t: (-df[t], -tf[t], t))[:max_size]
    return Vocabulary(ranked, {t: df[t] for t in ranked}, len(corpus), max_size)


class TfIdfEmbedder:
    """Raw counts times smoothed idf ln((1 + N) / (1 + df)) + 1, L2-normalised."""

    trainable = False

    def __init__(self, vocab: Vocabulary):
        self.vocab = vocab
        n = vocab.n_docs
        self.idf = np.array([math.log((1 + n) / (1 + vocab.doc_freq[t])) + 1.0 for t in vocab.tokens])

    @classmethod
    def fit(cls, corpus, max_size: int = 8000) -> "TfIdfEmbedder":
        return cls(build_vocab(corpus, max_size))

    @property
    def dim(self) -> int:
        return len(self.vocab.tokens)

    def embed_tokens(self, tokens) -> np.ndarray:
        v = np.zeros(self.dim)
        for tok in tokens:
            i = self.vocab.index.get(tok)
            if i is not None:
                v[i] += 1.0
        v *= self.idf
        norm = np.linalg.norm(v)
        return v / norm if norm > 0 else v

    def embed(self, records) -> np.ndarray:
        out = np.zeros((len(records), self.dim))
        for row, rec in enumerate(records):
            out[row] = self.embed_tokens(rec.tokens)
        return out

    def params(self) -> list[Param]:
        return []


class TableEmbedder:
    """Mean of per-token rows; unknown tokens use the UNK row, empty input gives zeros."""

    def __init__(self, vocab: Vocabulary, table: np.ndarray, trainable: bool = True):
        if table.shape[0] != len(vocab):
            raise ValueError(f"table has {table.shape[0]} rows for a vocabulary of {len(vocab)}")
        self.vocab = vocab
        self.table = Param("embedding.table", table, trainable=trainable)
        self._cache = None

    @classmethod
    def random(cls, vocab: Vocabulary, dim: int, rng: np.random.Generator, trainable: bool = True):
        return cls(vocab, rng.normal(0.0, 1.0, size=(len(vocab), dim)), trainable)

    @classmethod
    def from_vectors(cls, vectors: dict[str, np.ndarray], vocab: Vocabulary, rng: np.random.Generator,
                     trainable: bool = False):
        """Rows from loaded vectors; tokens missing from the file get N(0, 1) rows."""
        dim = len(next(iter(vectors.values())))
        table = rng.normal(0.0, 1.0, size=(len(vocab), dim))
        hits = 0
        for tok, i in vocab.index.items():
            vec = vectors.get(tok)
            if vec is not None:
                table[i] = vec
                hits += 1
        log.info("word vectors cover %d of %d vocabulary tokens", hits, len(vocab.tokens))
        return cls(vocab, table, trainable)

    @property
    def dim(self) -> int:
        return self.table.value.shape[1]

    @property
    def trainable(self) -> bool:
        return self.table.trainable

    def embed_tokens(self, tokens) -> np.ndarray:
        if not tokens:
            return np.zeros(self.dim)
        idx = [self.vocab.lookup(t) for t in tokens]
        return self.table.value[idx].mean(axis=0)

    def embed(self, records) -> np.ndarray:
        out = np.zeros((len(records), self.dim))
        rows, cols, weights = [], [], []
        for r, rec in enumerate(records):
            if not rec.tokens:
                continue
            idx = [self.vocab.lookup(t) for t in rec.tokens]
            out[r] = self.table.value[idx].mean(axis=0)
            rows.extend([r] * len(idx))
            cols.extend(idx)
            weights.extend([1.0 / len(idx)] * len(idx))
        self._cache = (np.array(rows, dtype=np.intp), np.array(cols, dtype=np.intp), np.array(weights))
        return out

    def backward(self, grad: np.ndarray) -> None:
        """Scatter grad / n_tokens into the rows used by the last ``embed`` call."""
        if self._cache is None or not self.trainable:
            return
        rows, cols, weights = self._cache
        self._cache = None
        np.add.at(self.table.grad, cols, grad[rows] * weights[:, None])

    def params(self) -> list[Param]:
        return [self.table]


class PrecomputedEmbedder:
    """Fixed per-sentence vectors keyed by record id (stand-in for a frozen encoder)."""

    trainable = False

    def __init__(self, vectors: dict[str, np.ndarray]):
        if not vectors:
            raise FormatError("no vectors loaded")
        self.vectors = vectors
        self._dim = len(next(iter(vectors.values())))

    @property
    def dim(self) -> int:
        return self._dim

    def check_ids(self, records) -> None:
        missing = [rec.id for rec in records if rec.id not in self.vectors]
        if missing:
            shown = ", ".join(missing[:5]) + (" ..." if len(missing) > 5 else "")
            raise LookupFailure(f"{len(missing)} record id(s) have no precomputed vector: {shown}")

    def lookup(self, record_id: str) -> np.ndarray:
        try:
            return self.vectors[record_id]
        except KeyError:
            raise LookupFailure(f"no precomputed vector for id {record_id!r}") from None

    def embed(self, records) -> np.ndarray:
        if not records:
            return np.zeros((0, self.dim))
        return np.stack([self.lookup(rec.id) for rec in records])

    def params(self) -> list[Param]:
        return []


def _parse_floats(parts, lineno, path):
    try:
        return np.array([float(p) for p in parts])
    except ValueError:
        raise ParseError("non-numeric vector component", line=lineno, path=path) from None


def read_word_vectors(path) -> dict[str, np.ndarray]:
    """Parse the text word-vector format: optional "V d" header, then "token x1 ... xd" lines."""
    path = str(path)
    vectors: dict[str, np.ndarray] = {}
    dim = None
    expected_count = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").rstrip("\r").split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                expected_count, dim = int(parts[0]), int(parts[1])
                continue
            if len(parts) < 2:
                raise ParseError("expected a token followed by its vector", line=lineno, path=path)
            vec = _parse_floats(parts[1:], lineno, path)
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise FormatError(f"expected {dim} components, found {len(vec)}", line=lineno, path=path)
            vectors[parts[0]] = vec
    if not vectors:
        raise FormatError("no vectors found", path=path)
    if expected_count is not None and expected_count != len(vectors):
        raise FormatError(f"header declares {expected_count} vectors, file has {len(vectors)}", path=path)
    return vectors


def load_word_vectors(path, vocab: Vocabulary, rng: np.random.Generator, trainable: bool = False) -> TableEmbedder:
    return TableEmbedder.from_vectors(read_word_vectors(path), vocab, rng, trainable)


def load_precomputed(path) -> PrecomputedEmbedder:
    """Read "id<TAB>x1 ... xd" lines (components may be tab- or space-separated)."""
    path = str(path)
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            if "\t" not in line:
                raise ParseError("expected id<TAB>vector", line=lineno, path=path)
            rid, rest = line.split("\t", 1)
            vec = _parse_floats(rest.split(), lineno, path)
            if rid in vectors:
                raise FormatError(f"duplicate id {rid!r}", line=lineno, path=path)
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise FormatError(f"expected {dim} components, found {len(vec)}", line=lineno, path=path)
            if dim == 0:
                raise FormatError("empty vector", line=lineno, path=path)
            vectors[rid] = vec
    return PrecomputedEmbedder(vectors)


def make_embedder(kind: str, train_records, *, vocab_size: int = 8000, embed_dim: int = 300,
                  trainable: bool | None = None, rng: np.random.Generator | None = None, base_dir=None):
    """Build an embedder from a kind string: tfidf, random, vectors:PATH or precomputed:PATH."""
    corpus = [rec.tokens for rec in train_records]
    rng = rng if rng is not None else np.random.default_rng(0)

    def resolve(p):
        p = Path(p)
        return p if p.is_absolute() or base_dir is None else Path(base_dir) / p

    if kind == "tfidf":
        return TfIdfEmbedder.fit(corpus, vocab_size)
    if kind == "random":
        return TableEmbedder.random(build_vocab(corpus, vocab_size), embed_dim, rng,
                                    trainable=True if trainable is None else trainable)
    if kind.startswith("vectors:"):
        return load_word_vectors(resolve(kind.split(":", 1)[1]), build_vocab(corpus, vocab_size), rng,
                                 trainable=False if trainable is None else trainable)
    if kind.startswith("precomputed:"):
        return load_precomputed(resolve(kind.split(":", 1)[1]))
    raise ValueError(f"unknown embedding kind {kind!r}; expected tfidf, random, vectors:PATH or precomputed:PATH")
