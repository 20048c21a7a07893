#!/usr/bin/env python3
"""Time the grid-scan kernels: compiled extension vs numpy fallback.

Builds seeded occupancy grids at a few realistic sizes, runs an identical
batch of first-fit / window-free queries through every importable backend,
and prints per-call times with the speedup of the compiled path.  Results
are asserted equal across backends while timing, so a run doubles as an
agreement check.

Usage: python3 benchmarks/bench_kernels.py [--calls N] [--repeats R]
"""

from __future__ import annotations

import argparse
import random
import statistics
import time

import numpy as np

from eonplan import kernels

GRIDS = [
    ("small", 8, 64),
    ("medium", 30, 200),
    ("large", 80, 320),
]


def make_grid(rng: random.Random, num_links: int, num_slots: int) -> np.ndarray:
    """Occupancy around 50% dense, laid down as contiguous blocks."""
    occ = np.zeros((num_links, num_slots), dtype=np.uint8)
    target = num_links * num_slots // 2
    placed = 0
    while placed < target:
        link = rng.randrange(num_links)
        width = rng.randint(1, 8)
        start = rng.randrange(num_slots - width + 1)
        placed += int(width - occ[link, start : start + width].sum())
        occ[link, start : start + width] = 1
    return occ


def make_queries(rng: random.Random, num_links: int, num_slots: int, calls: int):
    queries = []
    for _ in range(calls):
        n = rng.randint(1, min(4, num_links))
        links = np.array(rng.sample(range(num_links), n), dtype=np.int64)
        width = rng.randint(1, 8)
        start = rng.randrange(num_slots - width + 1)
        queries.append((links, width, start))
    return queries


def time_backend(impl, occ, queries, repeats: int):
    """Best-of-R wall time for the whole batch, plus the result vector."""
    results = None
    laps = []
    for _ in range(repeats):
        got = []
        t0 = time.perf_counter()
        for links, width, start in queries:
            got.append(impl.first_fit(occ, links, width))
            got.append(impl.window_free(occ, links, start, width))
        laps.append(time.perf_counter() - t0)
        results = got
    return min(laps), results


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--calls", type=int, default=2000, help="queries per grid")
    ap.add_argument("--repeats", type=int, default=5, help="timing repeats, best kept")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)} (active: {kernels.backend_name()})")
    if "compiled" not in backends:
        print("note: compiled extension not importable; timing the fallback only")

    header = f"{'grid':<8} {'shape':<10} " + "".join(
        f"{name + ' us/call':>18}" for name in backends
    )
    print(header + ("   speedup" if len(backends) > 1 else ""))

    ratios = []
    for label, num_links, num_slots in GRIDS:
        rng = random.Random(args.seed)
        occ = make_grid(rng, num_links, num_slots)
        queries = make_queries(rng, num_links, num_slots, args.calls)
        per_call = {}
        reference = None
        for name, impl in backends.items():
            elapsed, results = time_backend(impl, occ, queries, args.repeats)
            per_call[name] = elapsed / (2 * args.calls) * 1e6
            if reference is None:
                reference = results
            elif results != reference:
                raise SystemExit(f"backend {name} disagrees on grid {label}")
        row = f"{label:<8} {num_links}x{num_slots:<7} " + "".join(
            f"{per_call[name]:>18.2f}" for name in backends
        )
        if "compiled" in per_call and "pure" in per_call:
            ratio = per_call["pure"] / per_call["compiled"]
            ratios.append(ratio)
            row += f"   {ratio:>6.1f}x"
        print(row)

    if ratios:
        print(f"geometric mean speedup: {statistics.geometric_mean(ratios):.1f}x")


if __name__ == "__main__":
    main()
