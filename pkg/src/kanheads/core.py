"""Dense float64 math shared by every head.

Matrices are plain 2-D ``numpy.ndarray`` objects of dtype float64 in C
(row-major) order.
"""
from __future__ import annotations

import zlib

import numpy as np

from .errors import ShapeError

ACTIVATIONS = ("relu", "sigmoid", "tanh", "silu")


def as_matrix(x) -> np.ndarray:
    m = np.ascontiguousarray(x, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply matrices of shapes {a.shape} and {b.shape}")
    return a @ b


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def log_softmax_rows(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def sigmoid(x: np.ndarray) -> np.ndarray:
    # split by sign so exp never overflows
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def silu(x: np.ndarray) -> np.ndarray:
    return x * sigmoid(x)


def activation(x: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return np.maximum(x, 0.0)
    if kind == "sigmoid":
        return sigmoid(x)
    if kind == "tanh":
        return np.tanh(x)
    if kind == "silu":
        return silu(x)
    raise ValueError(f"unknown activation {kind!r}; expected one of {ACTIVATIONS}")


def activation_grad(x: np.ndarray, kind: str) -> np.ndarray:
    """Elementwise derivative of ``activation(x, kind)`` at ``x``.

    ReLU uses 0 at the kink.
    """
    if kind == "relu":
        return (x > 0).astype(np.float64)
    if kind == "sigmoid":
        s = sigmoid(x)
        return s * (1.0 - s)
    if kind == "tanh":
        t = np.tanh(x)
        return 1.0 - t * t
    if kind == "silu":
        s = sigmoid(x)
        return s * (1.0 + x * (1.0 - s))
    raise ValueError(f"unknown activation {kind!r}; expected one of {ACTIVATIONS}")


def derive_rng(seed: int, consumer: str) -> np.random.Generator:
    """Independent generator for one named consumer of a run seed.

    Streams are keyed on (seed, consumer name), so adding a new consumer
    never shifts the draws seen by existing ones.
    """
    key = zlib.crc32(consumer.encode("utf-8"))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, key])))


def kaiming_uniform(rng: np.random.Generator, fan_in: int, rows: int, cols: int, a: float = 0.0) -> np.ndarray:
    """U(-b, b) with b = sqrt(6 / ((1 + a^2) fan_in)).

    ``a = 0`` is the plain ReLU-family gain; ``a = sqrt(5)`` gives
    b = 1 / sqrt(fan_in), the usual default for dense layers.
    """
    if fan_in < 1:
        raise ValueError(f"fan_in must be >= 1, got {fan_in}")
    bound = np.sqrt(6.0 / ((1.0 + a * a) * fan_in))
    return rng.uniform(-bound, bound, size=(rows, cols))
