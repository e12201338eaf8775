"""Flat ``key = value`` experiment configs.

Blank lines and ``#`` comments are ignored; list values are comma-separated.
Relative paths are resolved against the config file's directory.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import get_type_hints

from .errors import ConfigError
from .heads import FAMILIES
from .training import TrainConfig

TRUE = {"1", "true", "yes", "on"}
FALSE = {"0", "false", "no", "off"}
EMBEDDING_PREFIXES = ("vectors:", "precomputed:")


@dataclass
class ExperimentConfig:
    dataset: str = ""
    test_fraction: float = 0.2
    embedding: list[str] = field(default_factory=lambda: ["tfidf"])
    head: list[str] = field(default_factory=lambda: ["mlp"])
    # head hyperparameters
    layers: int = 1
    hidden_dim: int = 64
    activation: str = "relu"
    grid_size: int = 8
    spline_order: int = 3
    use_scaler: bool = True
    use_silu: bool = False
    fourier_bias: bool = True
    l1_strength: float = 0.0
    # embeddings
    vocab_size: int = 8000
    embed_dim: int = 300
    trainable_embeddings: str = "auto"
    # training; epochs/batch_size "auto" picks 15/32 for static and 5/8 for precomputed vectors
    epochs: str = "auto"
    batch_size: str = "auto"
    head_lr: float = 2e-4
    backbone_lr: float = 2e-5
    weight_decay: float = 0.01
    clip_max_norm: float = 1.0
    dropout: float = 0.3
    early_stop_patience: int = 3
    seed: int = 0
    out_dir: str = "runs"
    # bench
    bench_in: int = 100
    bench_out: int = 6
    bench_batch: int = 32
    bench_warmup: int = 5
    bench_iters: int = 50
    kernel_backend: str = "auto"
    base_dir: str = field(default=".", metadata={"internal": True})

    def validate(self) -> None:
        for h in self.head:
            if h not in FAMILIES:
                raise ConfigError(f"head: unknown family {h!r}; expected one of {', '.join(FAMILIES)}")
        for e in self.embedding:
            if e not in ("tfidf", "random") and not e.startswith(EMBEDDING_PREFIXES):
                raise ConfigError(f"embedding: unknown kind {e!r}; expected tfidf, random, vectors:PATH "
                                  f"or precomputed:PATH")
        if not self.head:
            raise ConfigError("head: at least one head family is required")
        if not self.embedding:
            raise ConfigError("embedding: at least one embedding kind is required")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError(f"test_fraction: must be in (0, 1), got {self.test_fraction}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout: must be in [0, 1), got {self.dropout}")
        if self.trainable_embeddings not in ("auto", "true", "false"):
            raise ConfigError("trainable_embeddings: expected auto, true or false")
        if self.kernel_backend not in ("auto", "cython", "python"):
            raise ConfigError("kernel_backend: expected auto, cython or python")
        for key in ("epochs", "batch_size"):
            v = getattr(self, key)
            if v != "auto" and not (v.isdigit() and int(v) > 0):
                raise ConfigError(f"{key}: expected a positive integer or auto, got {v!r}")
        for key in ("layers",):
            if getattr(self, key) not in (1, 2):
                raise ConfigError(f"{key}: must be 1 or 2")
        for key in ("hidden_dim", "grid_size", "vocab_size", "embed_dim", "bench_in", "bench_out",
                    "bench_batch", "bench_iters", "early_stop_patience"):
            if getattr(self, key) < 1:
                raise ConfigError(f"{key}: must be >= 1")
        for key in ("head_lr", "backbone_lr", "clip_max_norm"):
            if not getattr(self, key) > 0:
                raise ConfigError(f"{key}: must be > 0")
        if self.spline_order < 0 or self.spline_order > 15:
            raise ConfigError("spline_order: must be in [0, 15]")
        if self.activation not in ("relu", "sigmoid"):
            raise ConfigError("activation: expected relu or sigmoid")

    def resolve(self, p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() else Path(self.base_dir) / path

    def train_config(self, embedding: str, seed: int | None = None) -> TrainConfig:
        contextual = embedding.startswith("precomputed:")
        epochs = (5 if contextual else 15) if self.epochs == "auto" else int(self.epochs)
        batch = (8 if contextual else 32) if self.batch_size == "auto" else int(self.batch_size)
        return TrainConfig(
            epochs=epochs, batch_size=batch, head_lr=self.head_lr, backbone_lr=self.backbone_lr,
            weight_decay=self.weight_decay, clip_max_norm=self.clip_max_norm, dropout=self.dropout,
            early_stop_patience=self.early_stop_patience, seed=self.seed if seed is None else seed,
            l1_strength=self.l1_strength,
        )

    def trainable_flag(self) -> bool | None:
        return None if self.trainable_embeddings == "auto" else self.trainable_embeddings == "true"

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if not f.metadata.get("internal")}


_HINTS = None


def _convert(key: str, raw: str, lineno: int, where: str):
    global _HINTS
    if _HINTS is None:
        _HINTS = get_type_hints(ExperimentConfig)
    kind = _HINTS[key]

    def fail(expected):
        raise ConfigError(f"{where}:{lineno}: key {key!r}: expected {expected}, got {raw!r}")

    if kind is bool:
        low = raw.lower()
        if low in TRUE:
            return True
        if low in FALSE:
            return False
        fail("a boolean")
    if kind is int:
        try:
            return int(raw)
        except ValueError:
            fail("an integer")
    if kind is float:
        try:
            return float(raw)
        except ValueError:
            fail("a number")
    if kind == list[str]:
        items = [item.strip() for item in raw.split(",")]
        if any(not item for item in items):
            fail("a comma-separated list without empty items")
        return items
    return raw


def parse_config(text: str, source: str = "<config>", base_dir=".") -> ExperimentConfig:
    cfg = ExperimentConfig(base_dir=str(base_dir))
    known = {f.name for f in fields(ExperimentConfig) if not f.metadata.get("internal")}
    seen = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, value = (s.strip() for s in stripped.split("=", 1))
        if key not in known:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: key {key!r} already set on line {seen[key]}")
        if not value:
            raise ConfigError(f"{source}:{lineno}: key {key!r} has no value")
        seen[key] = lineno
        setattr(cfg, key, _convert(key, value, lineno, source))
    cfg.validate()
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise ConfigError(f"config {path} is not valid UTF-8") from None
    return parse_config(text, str(path), base_dir=path.parent)


def with_overrides(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    changes = {k: v for k, v in changes.items() if v is not None}
    out = dataclasses.replace(cfg, **changes)
    out.validate()
    return out
