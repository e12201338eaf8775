"""End-to-end runs: load, split, embed, train, evaluate, report."""
from __future__ import annotations

import json
import logging
import re
from importlib import resources
from pathlib import Path

from . import kernels
from .config import ExperimentConfig
from .core import derive_rng
from .dataset import load_tsv, stratified_split
from .embeddings import PrecomputedEmbedder, make_embedder
from .errors import DataError
from .evalbench import BenchReport, bench_latency, evaluate, format_table, table_rows
from .heads import HeadSpec, build_head, count_params, save_checkpoint
from .training import train

log = logging.getLogger(__name__)

HEAD_LABELS = {"mlp": "MLP", "fourierkan": "FourierKAN", "efficientkan": "EfficientKAN", "fasterkan": "FasterKAN"}

RUN_RECORD = "run_record.json"
BENCH_REPORT = "bench_report.json"
CHECKPOINT = "head.kanh"


def embedding_label(kind: str) -> str:
    if kind == "tfidf":
        return "Tf-IDF"
    if kind == "random":
        return "Random Embedding"
    prefix, _, path = kind.partition(":")
    return f"{'Word vectors' if prefix == 'vectors' else 'Precomputed'} ({Path(path).stem})"


def model_name(embedding: str, head: str) -> str:
    return f"{embedding_label(embedding)} + {HEAD_LABELS[head]}"


def apply_backend(cfg: ExperimentConfig) -> None:
    if cfg.kernel_backend != "auto":
        kernels.use_backend(cfg.kernel_backend)


def dataset_path(cfg: ExperimentConfig) -> Path:
    if cfg.dataset == "@toy":
        return Path(str(resources.files("kanheads") / "data" / "toy.tsv"))
    if not cfg.dataset:
        raise DataError("no dataset configured (set 'dataset = PATH')")
    return cfg.resolve(cfg.dataset)


def load_data(cfg: ExperimentConfig):
    path = dataset_path(cfg)
    if not path.is_file():
        raise DataError(f"dataset not found: {path}")
    ds = load_tsv(path)
    if len(ds) == 0:
        raise DataError(f"dataset {path} has no records")
    return ds


def head_spec(cfg: ExperimentConfig, family: str, in_features: int, out_features: int) -> HeadSpec:
    return HeadSpec(
        family=family, in_features=in_features, out_features=out_features, layers=cfg.layers,
        hidden_dim=cfg.hidden_dim, activation=cfg.activation, grid_size=cfg.grid_size,
        spline_order=cfg.spline_order, use_scaler=cfg.use_scaler, use_silu=cfg.use_silu,
        l1_strength=cfg.l1_strength, fourier_bias=cfg.fourier_bias, dropout=cfg.dropout,
    )


def run_single(cfg: ExperimentConfig, head_family: str, embedding: str, seed: int, out_dir: Path, ds=None):
    """Train one head/embedding cell and write its three output files."""
    ds = ds if ds is not None else load_data(cfg)
    train_ds, test_ds = stratified_split(ds, cfg.test_fraction, derive_rng(seed, "split"))
    embedder = make_embedder(embedding, train_ds.records, vocab_size=cfg.vocab_size, embed_dim=cfg.embed_dim,
                             trainable=cfg.trainable_flag(), rng=derive_rng(seed, "embedding"),
                             base_dir=cfg.base_dir)
    if isinstance(embedder, PrecomputedEmbedder):
        embedder.check_ids(ds.records)
    spec = head_spec(cfg, head_family, embedder.dim, ds.n_classes)
    head = build_head(spec, seed)
    tcfg = cfg.train_config(embedding, seed)
    head, record = train(head, embedder, train_ds, test_ds, tcfg, validation_is_test=True)
    cm, f1, acc = evaluate(head, embedder, test_ds)

    h_total, h_train = count_params(head)
    e_total = sum(p.size for p in embedder.params())
    e_train = sum(p.size for p in embedder.params() if p.trainable)
    report = BenchReport(
        model=model_name(embedding, head_family),
        params_total=h_total + e_total,
        params_trainable=h_train + e_train,
        train_seconds=record.train_seconds,
        fwd_ms_mean=record.fwd_ms_mean,
        bwd_ms_mean=record.bwd_ms_mean,
        f1_weighted=f1,
        accuracy=acc,
        batch_size=tcfg.batch_size,
    )
    record.config = {**cfg.to_dict(), "head": head_family, "embedding": embedding, "seed": seed,
                     "train": record.config, "kernel_backend": kernels.backend_name()}
    record.test_f1 = f1
    record.test_accuracy = acc
    record.confusion = cm.tolist()
    record.label_names = list(ds.label_names)

    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / RUN_RECORD).write_text(record.to_json() + "\n", encoding="utf-8")
    (out_dir / BENCH_REPORT).write_text(report.to_json() + "\n", encoding="utf-8")
    extra = {p.name: p.value for p in embedder.params() if p.trainable}
    save_checkpoint(out_dir / CHECKPOINT, head, extra)
    return head, record, report


def cell_seed(master_seed: int, head: str, embedding: str) -> int:
    return int(derive_rng(master_seed, f"grid:{embedding}:{head}").integers(0, 2**31 - 1))


def cell_dir(out_dir: Path, head: str, embedding: str) -> Path:
    slug = re.sub(r"[^A-Za-z0-9]+", "-", embedding).strip("-")
    return out_dir / f"{slug}__{head}"


def write_table(reports, out_dir: Path, stem: str) -> str:
    text = format_table(reports)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{stem}.txt").write_text(text + "\n", encoding="utf-8")
    payload = {
        "columns": ["model", "params", "train_s", "fwd_ms", "bwd_ms", "f1", "accuracy"],
        "rows": table_rows(reports),
        "reports": [r.to_dict() for r in reports],
    }
    (out_dir / f"{stem}.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return text


def run_bench(cfg: ExperimentConfig, out_dir: Path):
    """Params and latency for each configured head on random input, no training."""
    reports = []
    for family in cfg.head:
        spec = head_spec(cfg, family, cfg.bench_in, cfg.bench_out)
        head = build_head(spec, cfg.seed)
        fwd, bwd = bench_latency(head, (cfg.bench_batch, cfg.bench_in), cfg.bench_warmup, cfg.bench_iters,
                                 seed=cfg.seed)
        total, trainable = count_params(head)
        reports.append(BenchReport(model=f"{HEAD_LABELS[family]} (in={cfg.bench_in}, out={cfg.bench_out})",
                                   params_total=total, params_trainable=trainable, fwd_ms_mean=fwd,
                                   bwd_ms_mean=bwd, batch_size=cfg.bench_batch))
    return reports, write_table(reports, out_dir, "bench")

