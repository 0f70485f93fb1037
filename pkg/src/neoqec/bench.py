"""Benchmark of the compiled kernels against the pure fallback.

Run with `python -m neoqec.bench`.  Workloads mirror the hot paths: the base
binarized net on a d=9 grid, exact matching at a challenging defect count,
greedy sweeps, the bit-serial counter fuzz, and an end-to-end decode sweep.
"""

from __future__ import annotations

import time

import numpy as np

from .kernels import BACKEND, pure

try:
    from .kernels import _accel as accel
except ImportError:
    accel = None


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _workloads():
    rng = np.random.default_rng(1)
    x = (rng.random((10, 17, 17)) < 0.3).astype(np.uint8)
    w1 = (rng.random((16, 10, 7, 7)) < 0.5).astype(np.uint8)
    t1 = rng.integers(200, 290, 16).astype(np.int32)
    w2 = (rng.random((16, 16, 5, 5)) < 0.5).astype(np.uint8)
    t2 = rng.integers(150, 250, 16).astype(np.int32)

    def conv(mod):
        a = mod.binary_conv_layer(x, w1, t1)
        mod.binary_conv_layer(a, w2, t2)

    n = 14
    pts = rng.integers(0, 12, (n, 3)).astype(np.int64)
    wm = np.abs(pts[:, None, :] - pts[None, :, :]).sum(axis=2)
    bm = rng.integers(1, 8, n).astype(np.int64)

    def matching(mod):
        mod.mwpm_solve(wm, bm)

    m = 60
    gp = sorted({tuple(map(int, rng.integers(0, 10, 3))) for _ in range(m)})
    m = len(gp)
    gt = np.array([p[0] for p in gp], dtype=np.int64)
    gr = np.array([p[1] for p in gp], dtype=np.int64)
    gc = np.array([p[2] for p in gp], dtype=np.int64)
    gty = rng.integers(0, 2, m).astype(np.uint8)
    gb = rng.integers(1, 10, m).astype(np.int64)
    compat = np.ones((m, m), dtype=np.uint8)

    def greedy(mod):
        mod.greedy_pass(gt, gr, gc, gty, gb, compat, 12, 1)

    wn = (rng.random(490) < 0.5).astype(np.uint8)
    xn = (rng.random(490) < 0.5).astype(np.uint8)

    def npu(mod):
        for T in (100, 245, 400):
            mod.npu_sim(wn, xn, T, 9)

    return [
        ("binary conv (base net, d=9)", conv, 20),
        ("exact matching (n=14)", matching, 5),
        ("greedy sweep (60 defects)", greedy, 20),
        ("counter sim (3 x N=490)", npu, 50),
    ]


def run_decode_bench() -> list[tuple[str, float]]:
    import os

    from .sweeps import run_memory_trials

    rows = []
    t0 = time.perf_counter()
    run_memory_trials(5, 0.02, 300, seed=99, decoder="mwpm")
    rows.append(("mwpm decode, d=5, 300 trials [active backend]", time.perf_counter() - t0))
    return rows


def main() -> None:
    print(f"active backend: {BACKEND}")
    print(f"{'workload':40s} {'pure':>12s} {'accel':>12s} {'speedup':>9s}")
    for name, fn, repeat in _workloads():
        tp = _time(lambda: fn(pure), repeat)
        if accel is not None:
            ta = _time(lambda: fn(accel), repeat)
            print(f"{name:40s} {tp * 1e3:10.3f}ms {ta * 1e3:10.3f}ms {tp / ta:8.1f}x")
        else:
            print(f"{name:40s} {tp * 1e3:10.3f}ms {'n/a':>12s} {'':>9s}")
    for name, dt in run_decode_bench():
        print(f"{name:40s} {dt * 1e3:10.3f}ms")


if __name__ == "__main__":
    main()
