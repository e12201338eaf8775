"""Deterministic synthetic token-classification tasks."""
from __future__ import annotations

import numpy as np

from .dataset import LabeledDataset, Record


def _dataset(rows, n_classes, start_id=1):
    records = [Record(str(start_id + i), tuple(tokens), label) for i, (tokens, label) in enumerate(rows)]
    return LabeledDataset(records, [f"class{c}" for c in range(n_classes)])


def blob_sentences(n, n_classes, rng, class_vocab=4, shared_vocab=30, length=(6, 12), class_share=0.75):
    """Sentences mixing class-specific and shared tokens.

    Class pools are disjoint, so mean-pooled sentence vectors are linearly
    separable by construction.
    """
    rows = []
    for i in range(n):
        label = i % n_classes
        size = int(rng.integers(length[0], length[1] + 1))
        n_cls = max(1, int(round(size * class_share)))
        toks = [f"c{label}_w{j}" for j in rng.integers(0, class_vocab, size=n_cls)]
        toks += [f"s{j}" for j in rng.integers(0, shared_vocab, size=size - n_cls)]
        rng.shuffle(toks)
        rows.append((toks, label))
    return rows


def blobs_task(n_train=300, n_test=100, n_classes=3, seed=0):
    """Linearly separable 3-class token task, as (train, test)."""
    rng = np.random.default_rng([seed, 101])
    rows = blob_sentences(n_train + n_test, n_classes, rng)
    order = rng.permutation(len(rows))
    rows = [rows[i] for i in order]
    return _dataset(rows[:n_train], n_classes), _dataset(rows[n_train:], n_classes, start_id=n_train + 1)


def ring_sentences(n, rng, radii=(0.35, 0.65, 0.95), noise=0.06, bins=10, shared_vocab=20, n_noise=2):
    """Concentric rings in the plane rendered as coordinate-bin tokens.

    A point becomes one token for its x bin and one for its y bin on the
    [-1, 1] square, plus a few shared noise tokens; the label is the ring.
    """
    rows = []
    n_classes = len(radii)
    edges = np.linspace(-1.0, 1.0, bins + 1)
    for i in range(n):
        label = i % n_classes
        r = radii[label] + rng.normal(0.0, noise)
        theta = rng.uniform(0.0, 2.0 * np.pi)
        x, y = np.clip(r * np.cos(theta), -0.999, 0.999), np.clip(r * np.sin(theta), -0.999, 0.999)
        bx = int(np.searchsorted(edges, x, side="right") - 1)
        by = int(np.searchsorted(edges, y, side="right") - 1)
        toks = [f"x{bx}", f"y{by}"] + [f"s{j}" for j in rng.integers(0, shared_vocab, size=n_noise)]
        rng.shuffle(toks)
        rows.append((toks, label))
    return rows


def rings_task(n_train=300, n_test=100, seed=0, **kwargs):
    """Three concentric-ring classes mapped to token patterns, as (train, test)."""
    rng = np.random.default_rng([seed, 202])
    rows = ring_sentences(n_train + n_test, rng, **kwargs)
    return _dataset(rows[:n_train], 3), _dataset(rows[n_train:], 3, start_id=n_train + 1)


def write_tsv(ds: LabeledDataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in ds.records:
            fh.write(f"{ds.label_names[rec.label]}\t{' '.join(rec.tokens)}\n")
