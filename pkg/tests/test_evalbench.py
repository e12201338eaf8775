import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kanheads.evalbench import (TABLE_COLUMNS, BenchReport, accuracy, bench_latency, confusion_matrix,
                                format_table, per_class_f1, predict, weighted_f1)
from kanheads.heads import HeadSpec, build_head


def test_weighted_f1_hand_case():
    cm = np.array([[8, 2], [3, 7]])
    np.testing.assert_allclose(per_class_f1(cm), [16 / 21, 14 / 19], atol=1e-12)
    assert abs(weighted_f1(cm) - 0.74937) <= 1e-5


def test_perfect_diagonal():
    assert weighted_f1(np.diag([5, 3, 9])) == 1.0
    assert accuracy(np.diag([5, 3, 9])) == 1.0


def test_zero_support_class_has_no_weight():
    cm = np.array([[8, 2, 0], [3, 7, 0], [0, 0, 0]])
    assert weighted_f1(cm) == pytest.approx(weighted_f1(cm[:2, :2]), abs=1e-15)


def test_empty_confusion_matrix_raises():
    with pytest.raises(ValueError):
        weighted_f1(np.zeros((2, 2)))


def test_confusion_matrix_layout():
    cm = confusion_matrix([0, 0, 1, 2], [0, 1, 1, 0], 3)
    assert cm.tolist() == [[1, 1, 0], [0, 1, 0], [1, 0, 0]]


def brute_weighted_f1(y_true, y_pred, n):
    total = 0.0
    for c in range(n):
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == c and p == c)
        fp = sum(1 for t, p in zip(y_true, y_pred) if t != c and p == c)
        fn = sum(1 for t, p in zip(y_true, y_pred) if t == c and p != c)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        total += f1 * (tp + fn)
    return total / len(y_true)


@settings(max_examples=80, deadline=None)
@given(pairs=st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=1, max_size=40))
def test_weighted_f1_matches_brute_force_and_is_bounded(pairs):
    y_true, y_pred = zip(*pairs)
    f1 = weighted_f1(confusion_matrix(y_true, y_pred, 4))
    assert 0.0 <= f1 <= 1.0
    assert f1 == pytest.approx(brute_weighted_f1(y_true, y_pred, 4), abs=1e-12)


def test_predict_ties_go_to_lower_index():
    head = build_head(HeadSpec("mlp", 2, 3, dropout=0.0), 0)
    head.params()[0].value[...] = 0
    head.params()[1].value[...] = [1.0, 1.0, 0.0]
    assert predict(head, np.ones((2, 2))).tolist() == [0, 0]


def test_bench_latency_counts_iterations():
    head = build_head(HeadSpec("fasterkan", 6, 3), 0)
    fwd, bwd, fs, bs = bench_latency(head, (4, 6), warmup=2, iters=7, return_samples=True)
    assert len(fs) == len(bs) == 7
    assert fwd > 0 and bwd > 0
    with pytest.raises(ValueError):
        bench_latency(head, (4, 6), iters=0)


def test_bench_report_json_round_trip():
    r = BenchReport(model="Tf-IDF + MLP", params_total=606, params_trainable=606, train_seconds=1.5,
                    fwd_ms_mean=0.1, bwd_ms_mean=0.2, f1_weighted=0.9, accuracy=0.91, batch_size=32)
    again = BenchReport.from_json(r.to_json())
    assert again == r
    assert json.loads(r.to_json())["latency_unit"] == "ms per batch call"


def test_table_columns_and_failed_rows():
    ok = BenchReport(model="A", params_total=2_000_000, params_trainable=1, train_seconds=3.14159,
                     fwd_ms_mean=0.5, bwd_ms_mean=0.25, f1_weighted=0.8, accuracy=0.85)
    bad = BenchReport(model="B", params_total=0, params_trainable=0, status="failed", error="x")
    lines = format_table([ok, bad]).splitlines()
    assert lines[0].split() == list(TABLE_COLUMNS)
    assert lines[2].split() == ["A", "2.00M", "3.14", "0.500", "0.250", "0.800", "0.850"]
    assert "FAILED" in lines[3]
