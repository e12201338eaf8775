"""Loss, optimiser, schedule and the head fine-tuning loop."""
from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from threadpoolctl import threadpool_limits

from .core import derive_rng, log_softmax_rows, softmax_rows
from .errors import ShapeError
from .evalbench import evaluate
from .layers import Dropout, EfficientKanLayer, Param

log = logging.getLogger(__name__)


def cross_entropy_loss(logits: np.ndarray, labels) -> tuple[float, np.ndarray]:
    """Mean negative log-likelihood of ``labels`` and its gradient w.r.t. ``logits``."""
    labels = np.asarray(labels, dtype=np.intp)
    n, c = logits.shape
    if labels.shape != (n,):
        raise ShapeError(f"expected {n} labels, got shape {labels.shape}")
    if n and (labels.min() < 0 or labels.max() >= c):
        raise ValueError(f"labels must lie in [0, {c}), got range [{labels.min()}, {labels.max()}]")
    rows = np.arange(n)
    loss = -log_softmax_rows(logits)[rows, labels].mean()
    grad = softmax_rows(logits)
    grad[rows, labels] -= 1.0
    return float(loss), grad / n


def cosine_lr(step: int, total_steps: int, lr_max: float, lr_min: float = 0.0) -> float:
    if total_steps <= 0 or step >= total_steps:
        return lr_min
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + math.cos(math.pi * step / total_steps))


def clip_global_norm(grads, max_norm: float) -> float:
    """Scale ``grads`` in place so their joint L2 norm is at most ``max_norm``.

    Returns the factor applied (1.0 when no clipping happened).
    """
    if not max_norm > 0:
        raise ValueError("max_norm must be > 0")
    total = math.sqrt(sum(float(np.vdot(g, g)) for g in grads))
    if total <= max_norm:
        return 1.0
    scale = max_norm / total
    for g in grads:
        g *= scale
    return scale


class AdamW:
    """Bias-corrected Adam with decoupled weight decay.

    ``groups`` is a list of dicts with keys ``params``, ``lr`` and
    ``weight_decay``; moments are keyed by position, so parameter order
    must stay fixed.
    """

    def __init__(self, groups, betas=(0.9, 0.999), eps=1e-8):
        self.groups = [dict(g, params=[p for p in g["params"] if p.trainable]) for g in groups]
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.t = 0
        self.m = [[np.zeros_like(p.value) for p in g["params"]] for g in self.groups]
        self.v = [[np.zeros_like(p.value) for p in g["params"]] for g in self.groups]

    def params(self) -> list[Param]:
        return [p for g in self.groups for p in g["params"]]

    def step(self, lr_scale: float = 1.0) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for g, ms, vs in zip(self.groups, self.m, self.v):
            lr = g["lr"] * lr_scale
            wd = g.get("weight_decay", 0.0)
            for p, m, v in zip(g["params"], ms, vs):
                if p.grad.shape != p.value.shape:
                    raise ShapeError(f"gradient shape {p.grad.shape} does not match parameter {p.name} {p.value.shape}")
                m *= self.beta1
                m += (1.0 - self.beta1) * p.grad
                v *= self.beta2
                v += (1.0 - self.beta2) * p.grad * p.grad
                update = (m / c1) / (np.sqrt(v / c2) + self.eps)
                if wd:
                    update = update + wd * p.value
                p.value -= lr * update


def adamw_step(state: AdamW, lr_scale: float = 1.0) -> None:
    state.step(lr_scale)


@dataclass
class TrainConfig:
    epochs: int = 15
    batch_size: int = 32
    head_lr: float = 2e-4
    backbone_lr: float = 2e-5
    weight_decay: float = 0.01
    clip_max_norm: float = 1.0
    dropout: float = 0.3
    early_stop_patience: int = 3
    seed: int = 0
    l1_strength: float = 0.0

    @classmethod
    def contextual(cls, **overrides) -> "TrainConfig":
        """Recipe for precomputed transformer vectors: 5 epochs, batch 8."""
        return replace(cls(epochs=5, batch_size=8), **overrides)


@dataclass
class RunRecord:
    config: dict
    epoch_losses: list[float] = field(default_factory=list)
    val_f1: list[float] = field(default_factory=list)
    best_epoch: int = -1
    best_f1: float = float("nan")
    best_accuracy: float = float("nan")
    epochs_run: int = 0
    steps: int = 0
    stopped_early: bool = False
    validation_is_test: bool = True
    train_seconds: float = 0.0
    fwd_ms_mean: float = 0.0
    bwd_ms_mean: float = 0.0
    test_f1: float | None = None
    test_accuracy: float | None = None
    confusion: list | None = None
    label_names: list | None = None

    NON_METRIC_FIELDS = ("config", "train_seconds", "fwd_ms_mean", "bwd_ms_mean")

    def to_dict(self) -> dict:
        return asdict(self)

    def metrics(self) -> dict:
        """Outcome fields only: no config echo, no wall-clock timings."""
        return {k: v for k, v in self.to_dict().items() if k not in self.NON_METRIC_FIELDS}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        return cls(**json.loads(text))


def _apply_config_to_head(head, config: TrainConfig) -> None:
    for layer in head.layers:
        if isinstance(layer, Dropout):
            layer.rate = config.dropout
        elif isinstance(layer, EfficientKanLayer):
            layer.l1_strength = config.l1_strength
    head.spec.dropout = config.dropout
    head.spec.l1_strength = config.l1_strength


def train(head, embedder, train_ds, valid_ds, config: TrainConfig, validation_is_test: bool = True):
    """Fine-tune ``head`` (and a trainable embedder) and return (head, RunRecord).

    One validation per epoch; the best-F1 snapshot is restored at the end.
    Training stops once ``early_stop_patience`` consecutive validations fail
    to improve on the best F1.
    """
    if embedder.dim != head.spec.in_features:
        raise ShapeError(f"embedder produces {embedder.dim}-d vectors but the head expects {head.spec.in_features}")
    if len(train_ds) == 0:
        raise ValueError("empty training set")
    if train_ds.n_classes > head.spec.out_features:
        raise ShapeError(f"{train_ds.n_classes} classes but the head has {head.spec.out_features} outputs")
    _apply_config_to_head(head, config)

    shuffle_rng = derive_rng(config.seed, "shuffle")
    head.set_dropout_rng(derive_rng(config.seed, "dropout"))
    emb_params = [p for p in embedder.params() if p.trainable]
    groups = [{"params": head.params(), "lr": config.head_lr, "weight_decay": config.weight_decay}]
    if emb_params:
        # decoupled decay would touch every table row each step; rows only move through their gradients
        groups.append({"params": emb_params, "lr": config.backbone_lr, "weight_decay": 0.0})
    opt = AdamW(groups)
    trainable = opt.params()

    records = train_ds.records
    labels = train_ds.labels
    n = len(records)
    per_epoch = math.ceil(n / config.batch_size)
    total_steps = config.epochs * per_epoch
    static_features = None if emb_params else embedder.embed(records)

    rec = RunRecord(config=asdict(config), validation_is_test=validation_is_test)
    best_state = None
    best_emb = None
    bad = 0
    fwd_ms, bwd_ms = [], []
    step = 0
    start = time.perf_counter()
    with threadpool_limits(limits=1):
        for epoch in range(config.epochs):
            order = shuffle_rng.permutation(n)
            loss_sum = 0.0
            for b in range(per_epoch):
                idx = order[b * config.batch_size:(b + 1) * config.batch_size]
                if static_features is not None:
                    x = static_features[idx]
                else:
                    x = embedder.embed([records[i] for i in idx])
                for p in trainable:
                    p.grad.fill(0.0)
                t0 = time.perf_counter_ns()
                logits = head.forward(x, training=True)
                t1 = time.perf_counter_ns()
                loss, grad = cross_entropy_loss(logits, labels[idx])
                loss += head.penalty()
                t2 = time.perf_counter_ns()
                grad_in = head.backward(grad)
                t3 = time.perf_counter_ns()
                head.add_penalty_grad()
                if emb_params:
                    embedder.backward(grad_in)
                fwd_ms.append((t1 - t0) / 1e6)
                bwd_ms.append((t3 - t2) / 1e6)
                clip_global_norm([p.grad for p in trainable], config.clip_max_norm)
                opt.step(cosine_lr(step, total_steps, 1.0))
                step += 1
                loss_sum += loss * len(idx)
            rec.epoch_losses.append(loss_sum / n)

            _, f1, acc = evaluate(head, embedder, valid_ds)
            rec.val_f1.append(f1)
            rec.epochs_run = epoch + 1
            log.info("epoch %d loss %.4f val_f1 %.4f", epoch + 1, rec.epoch_losses[-1], f1)
            if best_state is None or f1 > rec.best_f1:
                rec.best_f1, rec.best_accuracy, rec.best_epoch = f1, acc, epoch + 1
                best_state = head.state()
                best_emb = [p.value.copy() for p in emb_params]
                bad = 0
            else:
                bad += 1
                if bad >= config.early_stop_patience:
                    rec.stopped_early = epoch + 1 < config.epochs
                    break
    rec.train_seconds = time.perf_counter() - start
    rec.steps = step
    rec.fwd_ms_mean = float(np.mean(fwd_ms)) if fwd_ms else 0.0
    rec.bwd_ms_mean = float(np.mean(bwd_ms)) if bwd_ms else 0.0
    head.load_state(best_state)
    for p, v in zip(emb_params, best_emb):
        p.value[...] = v
    head.zero_grad()
    return head, rec
