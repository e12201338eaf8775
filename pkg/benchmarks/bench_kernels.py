"""Compare the compiled and numpy kernel backends.

Times each basis kernel on its own and a full head forward + backward pass,
single-threaded, and reports the speedup of every backend over ``python``.

    python benchmarks/bench_kernels.py [--batch 32] [--features 100] [--repeat 20] [--json out.json]
"""
from __future__ import annotations

import argparse
import json
import sys
import timeit

import numpy as np
from threadpoolctl import threadpool_limits

from kanheads import kernels
from kanheads.heads import HeadSpec, build_head


def cases(batch: int, features: int, grid: int):
    rng = np.random.default_rng(0)
    x = rng.uniform(-1.2, 1.2, size=(batch, features))
    centers = np.linspace(-1.0, 1.0, grid)
    out = {
        f"fourier_basis G={grid}": lambda: kernels.fourier_basis(x, grid),
        f"bspline_basis G={grid} k=3": lambda: kernels.bspline_basis(x, grid, 3),
        f"rswaf_basis G={grid}": lambda: kernels.rswaf_basis(x, centers, grid / 2),
    }
    grad = rng.normal(size=(batch, 6))
    for family in ("fourierkan", "efficientkan", "fasterkan"):
        head = build_head(HeadSpec(family, features, 6, grid_size=grid, dropout=0.0), 0)

        def step(head=head):
            head.forward(x, training=False)
            head.backward(grad)

        out[f"{family} fwd+bwd"] = step
    return out


def measure(fn, repeat: int) -> float:
    """Best-of-``repeat`` milliseconds per call."""
    fn()
    number = max(1, int(0.02 / max(timeit.timeit(fn, number=1), 1e-7)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number * 1e3


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batch", type=int, default=32)
    ap.add_argument("--features", type=int, default=100)
    ap.add_argument("--grid", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--json", help="also write results here")
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled backend not built; timing the numpy backend only", file=sys.stderr)
    results: dict[str, dict[str, float]] = {}
    with threadpool_limits(limits=1):
        for backend in backends:
            with kernels.backend(backend):
                for name, fn in cases(args.batch, args.features, args.grid).items():
                    results.setdefault(name, {})[backend] = measure(fn, args.repeat)

    print(f"batch={args.batch} features={args.features} grid={args.grid} (ms per call, best of {args.repeat})")
    header = f"{'case':<28}" + "".join(f"{b:>12}" for b in backends)
    if "cython" in backends:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, row in results.items():
        line = f"{name:<28}" + "".join(f"{row[b]:>12.4f}" for b in backends)
        if "cython" in backends:
            line += f"{row['python'] / row['cython']:>9.2f}x"
        print(line)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump({"args": vars(args), "ms_per_call": results}, fh, indent=2, sort_keys=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
