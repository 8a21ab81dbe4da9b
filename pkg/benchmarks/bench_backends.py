#!/usr/bin/env python3
"""Benchmark the propagator-application backends (compiled vs NumPy).

The per-mode block application runs twice per solver step and dominates the
linear stage on fine grids; this script times both implementations on
representative grids and prints a small table.

Usage:
    python benchmarks/bench_backends.py [--sizes 1:4096,2:512] [--repeats 50]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from hpchem import _accel
from hpchem.grid import make_grid
from hpchem.kernels import propagator_tables
from hpchem.model import ModelParams


def _time_call(fn, *args, repeats: int) -> float:
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_one(dim: int, n: int, repeats: int) -> list[tuple[str, float]]:
    grid = make_grid(dim, n, 100.0)
    params = ModelParams()
    tables = propagator_tables(grid, params, 0.01)
    rng = np.random.default_rng(0)
    shape = (dim + 1,) + grid.spectral_shape
    w = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    rows = [
        (
            "numpy",
            _time_call(
                lambda: _accel.apply_propagator_numpy(w.copy(), grid.xi_unit, *tables),
                repeats=repeats,
            ),
        )
    ]
    if _accel.HAVE_COMPILED:
        rows.append(
            (
                "compiled",
                _time_call(
                    lambda: _accel.apply_propagator_compiled(w.copy(), grid.xi_unit, *tables),
                    repeats=repeats,
                ),
            )
        )
    return rows


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--sizes",
        default="1:4096,2:512",
        help="comma-separated dim:points pairs",
    )
    parser.add_argument("--repeats", type=int, default=50)
    args = parser.parse_args(argv)

    print(f"{'grid':>12} {'backend':>10} {'best (ms)':>12} {'modes/s':>14}")
    for token in args.sizes.split(","):
        dim_s, n_s = token.split(":")
        dim, n = int(dim_s), int(n_s)
        modes = n ** (dim - 1) * (n // 2 + 1)
        for backend, seconds in bench_one(dim, n, args.repeats):
            rate = modes / seconds
            print(f"{f'{dim}d x {n}':>12} {backend:>10} {seconds * 1e3:>12.3f} {rate:>14.3g}")
    if not _accel.HAVE_COMPILED:
        print("note: compiled extension not built; showing NumPy fallback only")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
