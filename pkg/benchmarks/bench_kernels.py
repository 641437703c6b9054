#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Runs the hot kernels (neighbor sampling, segment aggregation) and one full
training epoch under both backends and prints the speedups. Each backend
runs in a subprocess so the import-time HETGNN_NUMBA selection applies.

Usage: python benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import json
import os
import subprocess
import sys
import textwrap

PROBE = textwrap.dedent("""
    import json, time
    import numpy as np
    from hetgnn import kernels
    from hetgnn.workloads import powerlaw_fixture, sbm_fixture
    from hetgnn.sampler import Fanouts, sample_khop
    from hetgnn.orchestrator import TrainConfig, run_training

    repeats = {repeats}
    graph, data = powerlaw_fixture()
    out = {{"backend": kernels.backend_name()}}

    # warm up compilation before timing
    kernels.sample_layer(graph.offsets, graph.targets,
                         np.arange(64, dtype=np.int64), 5, 0)

    dsts = np.arange(graph.num_vertices, dtype=np.int64)
    t0 = time.perf_counter()
    for r in range(repeats):
        kernels.sample_layer(graph.offsets, graph.targets, dsts, 8, r)
    out["sample_layer_s"] = (time.perf_counter() - t0) / repeats

    stack = sample_khop(graph, np.arange(128), Fanouts((10, 5, 5)), 3)
    block = stack.blocks[0]
    h = np.random.default_rng(0).standard_normal((block.n_src, 64))
    w = np.random.default_rng(1).standard_normal(block.n_edges)
    kernels.segment_weighted_rows(block.edge_src, block.edge_dst, w, h,
                                  block.n_dst)
    t0 = time.perf_counter()
    for _ in range(repeats * 20):
        kernels.segment_weighted_rows(block.edge_src, block.edge_dst, w, h,
                                      block.n_dst)
    out["segment_agg_s"] = (time.perf_counter() - t0) / (repeats * 20)

    sgraph, sdata = sbm_fixture()
    cfg = TrainConfig(strategy="layer-based", layers=3, fanouts=(5, 5, 5),
                      batch_size=64, hidden_dim=32, epochs=1, lr=0.005,
                      seed=1, hot_ratio=0.2, super_batch_n=4,
                      simulate_costs=False)
    t0 = time.perf_counter()
    reports = run_training(sgraph, sdata, cfg)
    out["train_epoch_s"] = time.perf_counter() - t0
    out["first_loss"] = reports[0].losses[0]
    print(json.dumps(out))
""")


def run_backend(flag: str, repeats: int) -> dict:
    env = dict(os.environ, HETGNN_NUMBA=flag)
    proc = subprocess.run(
        [sys.executable, "-c", PROBE.format(repeats=repeats)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    results = {}
    for flag, label in (("1", "numba"), ("0", "numpy")):
        results[label] = run_backend(flag, args.repeats)
        print(f"{label:6s} backend={results[label]['backend']}")

    numba, numpy_ = results["numba"], results["numpy"]
    if numba["first_loss"] != numpy_["first_loss"]:
        print("WARNING: backends disagree numerically!")
        return 1
    print(f"\n{'kernel':24s} {'numba':>12s} {'numpy':>12s} {'speedup':>9s}")
    for key, label in (("sample_layer_s", "full-graph sampling"),
                       ("segment_agg_s", "segment aggregation"),
                       ("train_epoch_s", "one training epoch")):
        a, b = numba[key], numpy_[key]
        print(f"{label:24s} {a * 1e3:10.2f}ms {b * 1e3:10.2f}ms {b / a:8.1f}x")
    print("\nbackends agree bit-for-bit on the first training loss "
          f"({numba['first_loss']:.12g})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
