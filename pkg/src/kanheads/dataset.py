"""Labelled, pre-tokenised sentences and the stratified train/test split."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, SplitError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Record:
    id: str
    tokens: tuple[str, ...]
    label: int


@dataclass
class LabeledDataset:
    records: list[Record]
    label_names: list[str]
    skipped_empty: int = field(default=0, compare=False)

    def __len__(self):
        return len(self.records)

    @property
    def n_classes(self) -> int:
        return len(self.label_names)

    @property
    def labels(self) -> np.ndarray:
        return np.array([r.label for r in self.records], dtype=np.intp)

    def class_counts(self) -> list[int]:
        return np.bincount(self.labels, minlength=self.n_classes).tolist()

    def subset(self, indices) -> "LabeledDataset":
        return LabeledDataset([self.records[i] for i in indices], list(self.label_names))


def parse_tsv_lines(lines, path="<string>") -> LabeledDataset:
    records, names, index = [], [], {}
    skipped = 0
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n").rstrip("\r")
        if lineno == 1:
            line = line.lstrip("﻿")
        if not line.strip():
            continue
        if "\t" not in line:
            raise ParseError("missing TAB between label and sentence", line=lineno, path=path)
        label, sentence = line.split("\t", 1)
        label = label.strip()
        if not label:
            raise ParseError("empty label", line=lineno, path=path)
        tokens = tuple(sentence.split())
        if not tokens:
            skipped += 1
            continue
        if label not in index:
            index[label] = len(names)
            names.append(label)
        records.append(Record(str(lineno), tokens, index[label]))
    if skipped:
        log.warning("%s: skipped %d record(s) with no tokens", path, skipped)
    return LabeledDataset(records, names, skipped)


def load_tsv(path) -> LabeledDataset:
    """Load ``label<TAB>tok tok tok`` lines; record ids are 1-based line numbers."""
    with open(path, encoding="utf-8") as fh:
        return parse_tsv_lines(fh, str(path))


def largest_remainder_counts(class_sizes, fraction: float) -> list[int]:
    """Per-class test counts summing to round(total * fraction)."""
    quotas = [n * fraction for n in class_sizes]
    counts = [math.floor(q) for q in quotas]
    target = round(sum(class_sizes) * fraction)
    order = sorted(range(len(quotas)), key=lambda c: (-(quotas[c] - counts[c]), c))
    for c in order[: max(0, target - sum(counts))]:
        counts[c] += 1
    return counts


def stratified_split(ds: LabeledDataset, test_fraction: float,
                     rng: np.random.Generator) -> tuple[LabeledDataset, LabeledDataset]:
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    labels = ds.labels
    members = [np.flatnonzero(labels == c) for c in range(ds.n_classes)]
    for c, idx in enumerate(members):
        if len(idx) < 2:
            raise SplitError(f"class {ds.label_names[c]!r} has {len(idx)} record(s); need at least 2 to split")
    counts = largest_remainder_counts([len(m) for m in members], test_fraction)
    train_idx, test_idx = [], []
    for idx, n_test in zip(members, counts):
        n_test = min(max(n_test, 1), len(idx) - 1)
        perm = idx[rng.permutation(len(idx))]
        test_idx.extend(perm[:n_test].tolist())
        train_idx.extend(perm[n_test:].tolist())
    return ds.subset(sorted(train_idx)), ds.subset(sorted(test_idx))
