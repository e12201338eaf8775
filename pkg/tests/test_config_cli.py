import json
from pathlib import Path

import pytest

from kanheads import cli
from kanheads.config import ExperimentConfig, load_config, parse_config
from kanheads.errors import ConfigError
from kanheads.experiment import BENCH_REPORT, CHECKPOINT, RUN_RECORD
from kanheads.synthetic import blobs_task, write_tsv

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_defaults_and_lists():
    cfg = parse_config("head = mlp, fasterkan\nuse_silu = yes\n# c\n\nepochs = 4  # trailing\n")
    assert cfg.head == ["mlp", "fasterkan"] and cfg.use_silu is True
    assert cfg.train_config("tfidf").epochs == 4
    assert cfg.train_config("precomputed:x.tsv").batch_size == 8
    assert ExperimentConfig().train_config("random").batch_size == 32


@pytest.mark.parametrize("text,needle", [
    ("bogus = 1\n", "unknown key 'bogus'"),
    ("seed = 1\nseed = 2\n", "already set on line 1"),
    ("seed = \n", "has no value"),
    ("seed = x\n", "expected an integer"),
    ("head = resnet\n", "unknown family"),
    ("just words\n", "expected 'key = value'"),
    ("test_fraction = 1.5\n", "test_fraction"),
])
def test_config_errors_name_the_problem(text, needle):
    with pytest.raises(ConfigError, match=needle.replace("(", r"\(")):
        parse_config(text, "c.cfg")


def test_error_carries_location():
    with pytest.raises(ConfigError, match=r"c\.cfg:2"):
        parse_config("seed = 1\nnope = 2\n", "c.cfg")


def test_missing_config_file_exit_code(tmp_path, capsys):
    assert cli.main(["train", "--config", str(tmp_path / "none.cfg")]) == cli.EXIT_CONFIG


def test_bad_arguments_exit_code(capsys):
    assert cli.main(["frobnicate"]) == cli.EXIT_CONFIG


def _dataset(tmp_path):
    train, test = blobs_task(n_train=60, n_test=15, seed=3)
    from kanheads.dataset import LabeledDataset

    path = tmp_path / "data.tsv"
    write_tsv(LabeledDataset(train.records + test.records, train.label_names), path)
    return path


def _cfg(tmp_path, body):
    path = tmp_path / "exp.cfg"
    path.write_text(f"dataset = {_dataset(tmp_path)}\nembed_dim = 8\nepochs = 3\nhead_lr = 0.01\n{body}",
                    encoding="utf-8")
    return path


def test_train_writes_outputs(tmp_path, capsys):
    cfg = _cfg(tmp_path, "head = efficientkan\nembedding = random\n")
    out = tmp_path / "run"
    assert cli.main(["train", "--config", str(cfg), "--out", str(out)]) == 0
    for name in (RUN_RECORD, BENCH_REPORT, CHECKPOINT):
        assert (out / name).is_file()
    report = json.loads((out / BENCH_REPORT).read_text())
    assert report["model"] == "Random Embedding + EfficientKAN"
    assert "weighted F1" in capsys.readouterr().out


def test_train_rejects_lists(tmp_path, capsys):
    cfg = _cfg(tmp_path, "head = mlp, fasterkan\n")
    assert cli.main(["train", "--config", str(cfg)]) == cli.EXIT_CONFIG


def test_missing_dataset_exit_code_names_path(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("dataset = nowhere.tsv\n", encoding="utf-8")
    assert cli.main(["train", "--config", str(cfg)]) == cli.EXIT_DATA
    assert "nowhere.tsv" in capsys.readouterr().err


def test_malformed_dataset_exit_code(tmp_path, capsys):
    data = tmp_path / "bad.tsv"
    data.write_text("pos\ta\nno tab\n", encoding="utf-8")
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(f"dataset = {data}\n", encoding="utf-8")
    assert cli.main(["train", "--config", str(cfg)]) == cli.EXIT_DATA
    assert "bad.tsv:2" in capsys.readouterr().err


def test_train_is_reproducible(tmp_path, capsys):
    cfg = _cfg(tmp_path, "head = fasterkan\nembedding = random\n")
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        assert cli.main(["train", "--config", str(cfg), "--seed", "11", "--out", str(out)]) == 0
    metrics = [{k: v for k, v in json.loads((o / RUN_RECORD).read_text()).items()
                if k not in ("config", "train_seconds", "fwd_ms_mean", "bwd_ms_mean")} for o in outs]
    assert metrics[0] == metrics[1]
    assert (outs[0] / CHECKPOINT).read_bytes() == (outs[1] / CHECKPOINT).read_bytes()


def test_grid_runs_every_cell(tmp_path, capsys):
    cfg = _cfg(tmp_path, "head = mlp, fourierkan\nembedding = tfidf, random\n")
    out = tmp_path / "grid"
    assert cli.main(["grid", "--config", str(cfg), "--out", str(out)]) == 0
    payload = json.loads((out / "grid.json").read_text())
    assert len(payload["rows"]) == 4
    assert {r["model"] for r in payload["rows"]} == {
        "Tf-IDF + MLP", "Tf-IDF + FourierKAN", "Random Embedding + MLP", "Random Embedding + FourierKAN"}


def test_grid_keeps_going_after_a_failed_cell(tmp_path, capsys):
    cfg = _cfg(tmp_path, "head = mlp, fasterkan\nembedding = tfidf, vectors:missing.vec\n")
    out = tmp_path / "grid"
    assert cli.main(["grid", "--config", str(cfg), "--out", str(out)]) == cli.EXIT_DATA
    reports = json.loads((out / "grid.json").read_text())["reports"]
    assert [r["status"] for r in reports] == ["ok", "ok", "failed", "failed"]
    assert "2 of 4" in capsys.readouterr().err


def test_bench_reports_param_counts(tmp_path, capsys):
    out = tmp_path / "bench"
    assert cli.main(["bench", "--config", str(CONFIGS / "bench.cfg"), "--out", str(out)]) == 0
    reports = {r["model"].split()[0]: r for r in json.loads((out / "bench.json").read_text())["reports"]}
    assert reports["MLP"]["params_total"] == 606
    assert reports["FourierKAN"]["params_total"] == 9606
    assert all(r["fwd_ms_mean"] > 0 and r["bwd_ms_mean"] > 0 for r in reports.values())


def test_shipped_configs_parse():
    for path in CONFIGS.glob("*.cfg"):
        load_config(path)
