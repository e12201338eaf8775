"""``kanheads`` command line: train, grid, bench.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import experiment
from .config import load_config, with_overrides
from .errors import ConfigError, DataError
from .evalbench import BenchReport

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3

log = logging.getLogger("kanheads")


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, (DataError, OSError, UnicodeDecodeError)):
        return EXIT_DATA
    return EXIT_RUNTIME


def _prepare(args):
    cfg = load_config(args.config)
    cfg = with_overrides(cfg, seed=args.seed, out_dir=str(Path(args.out).resolve()) if args.out else None)
    experiment.apply_backend(cfg)
    return cfg


def cmd_train(args) -> int:
    cfg = _prepare(args)
    if len(cfg.head) != 1 or len(cfg.embedding) != 1:
        raise ConfigError("train takes exactly one head and one embedding; use the grid command for lists")
    out_dir = cfg.resolve(cfg.out_dir).resolve()
    _, record, report = experiment.run_single(cfg, cfg.head[0], cfg.embedding[0], cfg.seed, out_dir)
    print(f"{report.model}: weighted F1 {report.f1_weighted:.4f}, accuracy {report.accuracy:.4f} "
          f"(best epoch {record.best_epoch}, {record.epochs_run} epochs) -> {out_dir}")
    return EXIT_OK


def cmd_grid(args) -> int:
    cfg = _prepare(args)
    out_dir = cfg.resolve(cfg.out_dir).resolve()
    reports, failures = [], []
    ds = experiment.load_data(cfg)
    for embedding in cfg.embedding:
        for head in cfg.head:
            seed = experiment.cell_seed(cfg.seed, head, embedding)
            name = experiment.model_name(embedding, head)
            try:
                _, _, report = experiment.run_single(cfg, head, embedding, seed,
                                                     experiment.cell_dir(out_dir, head, embedding), ds=ds)
            except Exception as exc:
                log.error("cell %s failed: %s", name, exc)
                failures.append(exc)
                report = BenchReport(model=name, params_total=0, params_trainable=0,
                                     status="failed", error=f"{type(exc).__name__}: {exc}")
            reports.append(report)
    print(experiment.write_table(reports, out_dir, "grid"))
    if failures:
        print(f"{len(failures)} of {len(reports)} cell(s) failed", file=sys.stderr)
        return exit_code_for(failures[0])
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _prepare(args)
    out_dir = cfg.resolve(cfg.out_dir).resolve()
    _, text = experiment.run_bench(cfg, out_dir)
    print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kanheads", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-epoch progress")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, text in (
        ("train", cmd_train, "train one head on one embedding"),
        ("grid", cmd_grid, "train every head x embedding combination"),
        ("bench", cmd_bench, "parameter counts and latency on random input"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="key = value config file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="override the output directory")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Exception as exc:
        print(f"kanheads {args.command}: error: {exc}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
