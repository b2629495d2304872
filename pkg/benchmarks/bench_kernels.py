#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Runs the hot kernels on identical inputs through both backends and prints
per-kernel timings with the compiled speedup.  Both backends produce
bit-identical outputs, so this only measures speed, not accuracy.

Usage: python3 benchmarks/bench_kernels.py [--repeats N] [--scale small|medium]
"""

import argparse
import time

import numpy as np

from subscan._kernels import backend_module

SCALES = {
    "small": dict(M=60, N=40, m=5, n=6, B=50, draws=20_000, trials=2_000),
    "medium": dict(M=200, N=100, m=10, n=15, B=100, draws=100_000, trials=10_000),
}


def best_of(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def build_cases(mod, p):
    M, N, m, n = p["M"], p["N"], p["m"], p["n"]
    x = mod.generate_matrix(0, 0.9, M, N, m, n, 31)
    # Typical calibration workload: scan a shuffled copy against the observed
    # value, so the early exit fires only when a restart truly reaches it.
    obs = mod.las_scan(x, m, n, 20, 100, 5)[0]
    xs = mod.shuffle_all(x, 99)
    xsT = np.ascontiguousarray(xs.T)
    pop = mod.tilted_draws(0, 0.0, 10_000, 17)
    return [
        (f"generate_matrix {M}x{N}", lambda: mod.generate_matrix(0, 0.9, M, N, m, n, 31)),
        (f"tilted_draws {p['draws']}", lambda: mod.tilted_draws(1, 0.3, p["draws"], 7)),
        (f"shuffle_all {M}x{N}", lambda: mod.shuffle_all(x, 11)),
        (f"shuffle_within_rows {M}x{N}", lambda: mod.shuffle_within_rows(x, 11)),
        (f"las_scan {M}x{N} ({m},{n}) R=20", lambda: mod.las_scan(x, m, n, 20, 100, 5)),
        (
            f"las_exceeds {M}x{N} ({m},{n})",
            lambda: mod.las_exceeds(xs, m, n, 20, 100, 5, obs, xsT),
        ),
        (
            f"without_replacement_means m=100 x{p['trials']}",
            lambda: mod.without_replacement_means(pop, 100, p["trials"], 3),
        ),
    ]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5, help="timing repeats per kernel")
    ap.add_argument("--scale", choices=sorted(SCALES), default="small")
    args = ap.parse_args()

    p = SCALES[args.scale]
    pure = backend_module("pure")
    try:
        compiled = backend_module("compiled")
    except ImportError:
        compiled = None
        print("compiled backend not available; timing the pure backend only\n")

    rows = []
    for (name, fn_pure), case_c in zip(
        build_cases(pure, p),
        build_cases(compiled, p) if compiled else build_cases(pure, p),
    ):
        t_pure = best_of(fn_pure, args.repeats)
        t_comp = best_of(case_c[1], args.repeats) if compiled else None
        rows.append((name, t_pure, t_comp))

    width = max(len(r[0]) for r in rows)
    header = f"{'kernel':<{width}}  {'pure':>10}  {'compiled':>10}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, t_pure, t_comp in rows:
        if t_comp is None:
            print(f"{name:<{width}}  {t_pure * 1e3:>8.2f}ms  {'-':>10}  {'-':>8}")
        else:
            print(
                f"{name:<{width}}  {t_pure * 1e3:>8.2f}ms  {t_comp * 1e3:>8.2f}ms"
                f"  {t_pure / t_comp:>7.1f}x"
            )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
