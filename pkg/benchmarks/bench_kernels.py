"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--batches N] [--repeat R]

Both backends must return identical outputs; the script checks that before
reporting timings.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from bats_inner import _backend, gf
from bats_inner import _kernels_py as python_kernels
from bats_inner.rng import Rng

SCENARIOS = [
    # name, q, M, t, eps
    ("M=8 GF(2) 3 hops", 2, 8, (12, 12, 12), (0.1, 0.2, 0.3)),
    ("M=16 GF(256) 2 hops", 256, 16, (18, 18), (0.2, 0.2)),
    ("M=16 GF(16) 6 hops", 16, 16, (19,) * 6, (0.15,) * 6),
]


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batches", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    compiled = _backend.compiled_kernels
    if compiled is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")

    print(f"{'scenario':<24}{'python s':>10}{'compiled s':>12}{'speedup':>9}")
    for name, q, M, t, eps in SCENARIOS:
        F = gf.gf(q)
        a = (np.array(t, dtype=np.int64), np.array(eps), M, 1, 0, args.batches)
        tp, rp = best_of(lambda: python_kernels.simulate_block(F, *a), 1)
        tc, rc = best_of(lambda: compiled.simulate_block(F, *a), args.repeat)
        assert list(map(int, rc[0])) == list(rp[0]) and list(map(int, rc[1])) == list(rp[1])
        print(f"{name:<24}{tp:>10.3f}{tc:>12.4f}{tp / tc:>9.0f}x")

    spec = gf.FieldSpec.of_order(256)
    F = gf.gf(256)
    rng = Rng(0)
    mats = [gf.random_matrix(16, 20, spec, rng) for _ in range(200)]
    tp, rp = best_of(lambda: [python_kernels.gf_rank(m, F) for m in mats], 1)
    tc, rc = best_of(lambda: [compiled.gf_rank(m, F) for m in mats], args.repeat)
    assert rp == rc
    print(f"{'rank 200x 16x20 GF(256)':<24}{tp:>10.3f}{tc:>12.4f}{tp / tc:>9.0f}x")


if __name__ == "__main__":
    main()
