"""Time the compiled kernels against the pure-Python fallback.

Workloads mirror real use: one familiarity reduction per evaluation
label over a few thousand training labels, and row entropies over a
similarity matrix. Run:

    python3 benchmarks/bench_kernels.py
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from labelshift.kernels import WEIGHT_CODES, _fallback

try:
    from labelshift.kernels import _fast
except ImportError:
    _fast = None


def time_call(fn, repeats: int) -> float:
    """Best-of-run mean in microseconds."""
    fn()  # warm up
    started = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - started) / repeats * 1e6


def bench_topk(rng: np.random.Generator, labels: int, k: int, repeats: int) -> list[tuple[str, float, float]]:
    sims = rng.random(labels)
    counts = rng.integers(1, 200, size=labels)
    rows = []
    for name, code in sorted(WEIGHT_CODES.items(), key=lambda kv: kv[1]):
        slow = time_call(lambda: _fallback.weighted_topk_mean(sims, counts, k, code), repeats)
        fast = (
            time_call(lambda: _fast.weighted_topk_mean(sims, counts, k, code), repeats)
            if _fast is not None
            else float("nan")
        )
        rows.append((f"topk {name} (n={labels}, k={k})", slow, fast))
    return rows


def bench_entropy(rng: np.random.Generator, rows: int, cols: int, repeats: int) -> list[tuple[str, float, float]]:
    values = rng.random((rows, cols))
    slow = time_call(lambda: _fallback.row_entropy(values, 0.01), repeats)
    fast = (
        time_call(lambda: _fast.row_entropy(values, 0.01), repeats)
        if _fast is not None
        else float("nan")
    )
    return [(f"entropy ({rows}x{cols})", slow, fast)]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--labels", type=int, default=5000, help="training labels per reduction")
    parser.add_argument("--k", type=int, default=1000)
    parser.add_argument("--rows", type=int, default=5000, help="entropy matrix rows")
    parser.add_argument("--cols", type=int, default=12, help="entropy matrix columns")
    parser.add_argument("--repeats", type=int, default=200)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    table = bench_topk(rng, args.labels, args.k, args.repeats)
    table += bench_entropy(rng, args.rows, args.cols, args.repeats)

    if _fast is None:
        print("compiled extension not available; fallback only\n")
    width = max(len(name) for name, _, _ in table)
    print(f"{'workload':<{width}}  {'fallback':>12}  {'compiled':>12}  {'speedup':>8}")
    for name, slow, fast in table:
        speedup = slow / fast if fast == fast and fast > 0 else float("nan")
        print(f"{name:<{width}}  {slow:>10.1f}us  {fast:>10.1f}us  {speedup:>7.1f}x")


if __name__ == "__main__":
    main()
