"""Kolmogorov-Arnold and MLP classification heads with hand-written gradients."""
from .core import activation, activation_grad, derive_rng, kaiming_uniform, matmul, softmax_rows
from .dataset import LabeledDataset, Record, load_tsv, stratified_split
from .embeddings import (PrecomputedEmbedder, TableEmbedder, TfIdfEmbedder, Vocabulary, build_vocab,
                         load_precomputed, load_word_vectors, make_embedder, read_word_vectors)
from .evalbench import BenchReport, bench_latency, confusion_matrix, evaluate, format_table, weighted_f1
from .heads import (FAMILIES, Head, HeadSpec, build_head, count_params, expected_param_count, load_checkpoint,
                    save_checkpoint)
from .training import AdamW, RunRecord, TrainConfig, clip_global_norm, cosine_lr, cross_entropy_loss, train

__version__ = "0.1.0"
