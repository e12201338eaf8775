"""Classification heads: MLP baseline and three KAN families.

A head is a short stack of layers emitting raw logits (softmax lives in the
loss). Input dropout is applied first; two-layer heads also drop out between
the layers.
"""
from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .core import derive_rng
from .errors import ConfigError, FormatError
from .layers import (Activation, Dropout, EfficientKanLayer, FasterKanLayer, FourierKanLayer, Layer, Linear,
                     Param)

FAMILIES = ("mlp", "fourierkan", "efficientkan", "fasterkan")


@dataclass
class HeadSpec:
    family: str
    in_features: int
    out_features: int
    layers: int = 1
    hidden_dim: int = 64
    activation: str = "relu"
    grid_size: int = 8
    spline_order: int = 3
    use_scaler: bool = True
    use_silu: bool = False
    l1_strength: float = 0.0
    fourier_bias: bool = True
    dropout: float = 0.3

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown head family {self.family!r}; expected one of {', '.join(FAMILIES)}")
        if self.layers not in (1, 2):
            raise ConfigError(f"head layers must be 1 or 2, got {self.layers}")
        for name in ("in_features", "out_features", "hidden_dim", "grid_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.spline_order < 0:
            raise ConfigError(f"spline_order must be >= 0, got {self.spline_order}")
        if self.activation not in ("relu", "sigmoid"):
            raise ConfigError(f"MLP activation must be relu or sigmoid, got {self.activation!r}")


class Head:
    def __init__(self, spec: HeadSpec, layers: list[Layer], seed: int):
        self.spec = spec
        self.layers = layers
        self.seed = seed

    @property
    def family(self) -> str:
        return self.spec.family

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x, training)
        return x

    __call__ = forward

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            grad_out = layer.backward(grad_out)
        return grad_out

    def params(self) -> list[Param]:
        return [p for layer in self.layers for p in layer.params()]

    def zero_grad(self) -> None:
        for p in self.params():
            p.grad.fill(0.0)

    def penalty(self) -> float:
        return sum(layer.penalty() for layer in self.layers)

    def add_penalty_grad(self) -> None:
        for layer in self.layers:
            layer.add_penalty_grad()

    def set_dropout_rng(self, rng: np.random.Generator) -> None:
        for layer in self.layers:
            if isinstance(layer, Dropout):
                layer.rng = rng

    def state(self) -> dict[str, np.ndarray]:
        return {p.name: p.value.copy() for p in self.params()}

    def load_state(self, state: dict[str, np.ndarray]) -> None:
        for p in self.params():
            p.value[...] = state[p.name]


def build_head(spec: HeadSpec, seed: int = 0) -> Head:
    rng = derive_rng(seed, "init")
    s = spec
    if s.layers == 1:
        dims = [(s.in_features, s.out_features, "")]
    else:
        dims = [(s.in_features, s.hidden_dim, "0."), (s.hidden_dim, s.out_features, "1.")]

    layers: list[Layer] = []
    for idx, (n_in, n_out, prefix) in enumerate(dims):
        layers.append(Dropout(s.dropout, n_in))
        if s.family == "mlp":
            layers.append(Linear(n_in, n_out, rng, prefix))
            if idx < len(dims) - 1:
                layers.append(Activation(s.activation, n_out))
        elif s.family == "fourierkan":
            layers.append(FourierKanLayer(n_in, n_out, s.grid_size, rng, bias=s.fourier_bias, prefix=prefix))
        elif s.family == "efficientkan":
            layers.append(EfficientKanLayer(n_in, n_out, s.grid_size, rng, spline_order=s.spline_order,
                                            use_scaler=s.use_scaler, l1_strength=s.l1_strength, prefix=prefix))
        else:
            layers.append(FasterKanLayer(n_in, n_out, s.grid_size, rng, use_silu=s.use_silu, prefix=prefix))
    return Head(spec, layers, seed)


def count_params(head: Head) -> tuple[int, int]:
    """(total, trainable) parameter entries."""
    ps = head.params()
    return sum(p.size for p in ps), sum(p.size for p in ps if p.trainable)


def expected_param_count(spec: HeadSpec) -> int:
    """Closed-form parameter count for a head spec."""

    def one(n_in, n_out):
        if spec.family == "mlp":
            return n_in * n_out + n_out
        if spec.family == "fourierkan":
            return 2 * spec.grid_size * n_in * n_out + (n_out if spec.fourier_bias else 0)
        if spec.family == "efficientkan":
            total = n_in * n_out + n_in * n_out * (spec.grid_size + spec.spline_order)
            return total + (n_in * n_out if spec.use_scaler else 0)
        total = n_in * spec.grid_size * n_out + n_out + spec.grid_size + 1
        return total + (n_in * n_out + n_out if spec.use_silu else 0)

    if spec.layers == 1:
        return one(spec.in_features, spec.out_features)
    return one(spec.in_features, spec.hidden_dim) + one(spec.hidden_dim, spec.out_features)


# Checkpoint container:
#   b"KANHEAD1" | u64 header length (LE) | UTF-8 JSON header | raw float64 LE tensors in header order
_MAGIC = b"KANHEAD1"


def save_checkpoint(path, head: Head, extra: dict[str, np.ndarray] | None = None) -> None:
    tensors = [(p.name, p.value) for p in head.params()]
    tensors += list((extra or {}).items())
    header = {
        "family": head.family,
        "spec": asdict(head.spec),
        "seed": int(head.seed),
        "tensors": [{"name": name, "shape": list(value.shape), "dtype": "<f8"} for name, value in tensors],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for _, value in tensors:
            fh.write(np.ascontiguousarray(value, dtype="<f8").tobytes())


def read_checkpoint(path) -> tuple[dict, dict[str, np.ndarray]]:
    raw = Path(path).read_bytes()
    if raw[:8] != _MAGIC:
        raise FormatError("not a head checkpoint (bad magic)", path=str(path))
    (hlen,) = struct.unpack("<Q", raw[8:16])
    header = json.loads(raw[16:16 + hlen].decode("utf-8"))
    offset = 16 + hlen
    tensors = {}
    for entry in header["tensors"]:
        count = int(np.prod(entry["shape"], dtype=np.int64))
        nbytes = 8 * count
        if offset + nbytes > len(raw):
            raise FormatError(f"truncated tensor {entry['name']!r}", path=str(path))
        tensors[entry["name"]] = np.frombuffer(raw, dtype="<f8", count=count, offset=offset).reshape(
            entry["shape"]).astype(np.float64)
        offset += nbytes
    if offset != len(raw):
        raise FormatError("trailing bytes after last tensor", path=str(path))
    return header, tensors


def load_checkpoint(path) -> tuple[Head, dict[str, np.ndarray]]:
    """Rebuild a head from a checkpoint; returns (head, extra tensors)."""
    header, tensors = read_checkpoint(path)
    known = {f.name for f in fields(HeadSpec)}
    spec = HeadSpec(**{k: v for k, v in header["spec"].items() if k in known})
    head = build_head(spec, header["seed"])
    names = [p.name for p in head.params()]
    missing = [n for n in names if n not in tensors]
    if missing:
        raise FormatError(f"checkpoint lacks tensors {missing}", path=str(path))
    head.load_state(tensors)
    extra = {k: v for k, v in tensors.items() if k not in set(names)}
    return head, extra
