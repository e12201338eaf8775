"""Classification metrics and forward/backward latency measurement."""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, fields

import numpy as np
from threadpoolctl import threadpool_limits

from .errors import ShapeError


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    """Counts with rows = true class, columns = predicted class."""
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(y_true, dtype=np.intp), np.asarray(y_pred, dtype=np.intp)), 1)
    return cm


def per_class_f1(cm: np.ndarray) -> np.ndarray:
    cm = np.asarray(cm, dtype=np.float64)
    tp = np.diag(cm)
    pred = cm.sum(axis=0)
    true = cm.sum(axis=1)
    precision = np.divide(tp, pred, out=np.zeros_like(tp), where=pred > 0)
    recall = np.divide(tp, true, out=np.zeros_like(tp), where=true > 0)
    denom = precision + recall
    return np.divide(2 * precision * recall, denom, out=np.zeros_like(tp), where=denom > 0)


def weighted_f1(cm: np.ndarray) -> float:
    """Support-weighted mean of per-class F1."""
    support = np.asarray(cm).sum(axis=1).astype(np.float64)
    total = support.sum()
    if total == 0:
        raise ValueError("empty confusion matrix")
    return float((per_class_f1(cm) * support).sum() / total)


def accuracy(cm: np.ndarray) -> float:
    cm = np.asarray(cm)
    return float(np.trace(cm) / cm.sum())


def predict(head, features: np.ndarray) -> np.ndarray:
    # np.argmax returns the first maximum, i.e. ties go to the lower class index
    return np.argmax(head.forward(features, training=False), axis=1)


def evaluate(head, embedder, ds, batch_size: int = 256) -> tuple[np.ndarray, float, float]:
    """(confusion matrix, weighted F1, accuracy) with dropout off."""
    if embedder.dim != head.spec.in_features:
        raise ShapeError(f"embedder produces {embedder.dim}-d vectors but the head expects {head.spec.in_features}")
    preds = []
    for start in range(0, len(ds.records), batch_size):
        preds.append(predict(head, embedder.embed(ds.records[start:start + batch_size])))
    y_pred = np.concatenate(preds) if preds else np.zeros(0, dtype=np.intp)
    cm = confusion_matrix(ds.labels, y_pred, max(ds.n_classes, head.spec.out_features))
    return cm, weighted_f1(cm), accuracy(cm)


def bench_latency(head, input_shape, warmup: int = 5, iters: int = 50, seed: int = 0,
                  return_samples: bool = False):
    """Mean forward and backward wall time in ms per batch call, single-threaded.

    Warmup iterations are run and discarded. The backward call is fed a
    random upstream gradient of the logits' shape.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=input_shape)
    fwd, bwd = [], []
    with threadpool_limits(limits=1):
        grad = rng.normal(size=(input_shape[0], head.spec.out_features))
        for i in range(warmup + iters):
            t0 = time.perf_counter_ns()
            head.forward(x, training=False)
            t1 = time.perf_counter_ns()
            head.backward(grad)
            t2 = time.perf_counter_ns()
            if i >= warmup:
                fwd.append((t1 - t0) / 1e6)
                bwd.append((t2 - t1) / 1e6)
    head.zero_grad()
    if return_samples:
        return float(np.mean(fwd)), float(np.mean(bwd)), fwd, bwd
    return float(np.mean(fwd)), float(np.mean(bwd))


@dataclass
class BenchReport:
    model: str
    params_total: int
    params_trainable: int
    train_seconds: float | None = None
    fwd_ms_mean: float | None = None
    bwd_ms_mean: float | None = None
    f1_weighted: float | None = None
    accuracy: float | None = None
    latency_unit: str = "ms per batch call"
    batch_size: int | None = None
    status: str = "ok"
    error: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "BenchReport":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})

    @classmethod
    def from_json(cls, text: str) -> "BenchReport":
        return cls.from_dict(json.loads(text))


TABLE_COLUMNS = ("model", "params", "train_s", "fwd_ms", "bwd_ms", "f1", "accuracy")


def _fmt_params(n):
    if n is None:
        return "-"
    return f"{n / 1e6:.2f}M" if n >= 10_000 else str(n)


def _fmt(v, spec):
    return "-" if v is None else format(v, spec)


def table_rows(reports) -> list[dict]:
    return [
        {
            "model": r.model,
            "params": r.params_total,
            "train_s": r.train_seconds,
            "fwd_ms": r.fwd_ms_mean,
            "bwd_ms": r.bwd_ms_mean,
            "f1": r.f1_weighted,
            "accuracy": r.accuracy,
        }
        for r in reports
    ]


def format_table(reports) -> str:
    """Aligned text table in the column order model, params, train_s, fwd_ms, bwd_ms, f1, accuracy."""
    rows = [TABLE_COLUMNS]
    for r in reports:
        if r.status != "ok":
            rows.append((r.model, "FAILED", "-", "-", "-", "-", "-"))
            continue
        rows.append((
            r.model,
            _fmt_params(r.params_total),
            _fmt(r.train_seconds, ".2f"),
            _fmt(r.fwd_ms_mean, ".3f"),
            _fmt(r.bwd_ms_mean, ".3f"),
            _fmt(r.f1_weighted, ".3f"),
            _fmt(r.accuracy, ".3f"),
        ))
    widths = [max(len(str(row[i])) for row in rows) for i in range(len(TABLE_COLUMNS))]
    lines = []
    for n, row in enumerate(rows):
        cells = [str(c).ljust(widths[0]) if i == 0 else str(c).rjust(widths[i]) for i, c in enumerate(row)]
        lines.append("  ".join(cells))
        if n == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)
