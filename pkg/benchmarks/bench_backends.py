"""Compare the numba kernels against the pure-numpy fallback.

Two parts:
  * micro: each kernel on representative shapes, both implementations in-process
  * end-to-end: ingest + range queries in a subprocess per backend
    (``BLOCKSVD_DISABLE_NUMBA`` picks the path at import time)

Usage: python benchmarks/bench_backends.py [--rows 20000] [--cols 20] [--block-size 100]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from blocksvd import _kernels as K


def timeit(fn, iterations: int) -> float:
    fn()
    start = time.perf_counter()
    for _ in range(iterations):
        fn()
    return (time.perf_counter() - start) / iterations


def micro(iterations: int) -> None:
    rng = np.random.default_rng(0)
    cases = []
    for n, k in [(50, 3), (500, 3), (999, 10)]:
        u_prev = rng.standard_normal((n, k))
        u_small = rng.standard_normal((k + 1, k))
        cases.append(
            (
                f"extend_left n={n} k={k}",
                lambda u=u_prev, s=u_small: K.extend_left_numpy(u, s),
                lambda u=u_prev, s=u_small: K.extend_left_numba(u, s),
            )
        )
    for n, k in [(100, 3), (1000, 5)]:
        out = np.empty((n, k))
        ub = rng.standard_normal((n, k))
        us = rng.standard_normal((k, k))
        cases.append(
            (
                f"left_product_into n={n} k={k}",
                lambda o=out, a=ub, s=us: K.left_product_into_numpy(o, 0, a, s),
                lambda o=out, a=ub, s=us: K.left_product_into_numba(o, 0, a, s),
            )
        )
    sigma = np.sort(rng.random(6))[::-1].copy()
    v = rng.standard_normal((20, 6))
    cases.append(
        ("weighted_rows k=6 c=20", lambda: K.weighted_rows_numpy(sigma, v), lambda: K.weighted_rows_numba(sigma, v))
    )
    a, b = rng.standard_normal(20000), rng.standard_normal(20000)
    cases.append(("abs_cosine n=20000", lambda: K.abs_cosine_numpy(a, b), lambda: K.abs_cosine_numba(a, b)))

    print(f"{'kernel':<32}{'numpy us':>12}{'numba us':>12}{'speedup':>10}")
    for name, f_np, f_nb in cases:
        t_np = timeit(f_np, iterations)
        t_nb = timeit(f_nb, iterations)
        print(f"{name:<32}{t_np * 1e6:>12.2f}{t_nb * 1e6:>12.2f}{t_np / t_nb:>10.2f}")


_E2E = r"""
import json, sys, time
import numpy as np
import blocksvd
from blocksvd.synthetic import low_rank_stream
rows, cols, b = int(sys.argv[1]), int(sys.argv[2]), int(sys.argv[3])
raw = low_rank_stream(rows, cols, 3, seed=1, noise=1e-3)
blocksvd.build_store(raw[: 2 * b], b, 0.98)  # compile / warm caches
t0 = time.perf_counter()
store = blocksvd.build_store(raw, b, 0.98)
ingest = time.perf_counter() - t0
rng = np.random.default_rng(2)
length = rows // 2
blocksvd.range_query(store, 0, length - 1)
times = []
for s in rng.integers(0, rows - length + 1, size=30):
    t0 = time.perf_counter()
    blocksvd.range_query(store, int(s), int(s) + length - 1)
    times.append(time.perf_counter() - t0)
print(json.dumps({"backend": blocksvd.BACKEND, "ingest_s": ingest, "query_ms": 1e3 * float(np.median(times))}))
"""


def end_to_end(rows: int, cols: int, block_size: int) -> None:
    results = []
    for disable in ("0", "1"):
        env = dict(os.environ, BLOCKSVD_DISABLE_NUMBA=disable)
        out = subprocess.run(
            [sys.executable, "-c", _E2E, str(rows), str(cols), str(block_size)],
            capture_output=True,
            text=True,
            env=env,
            check=True,
        )
        results.append(json.loads(out.stdout))
    print(f"\nend-to-end: {rows} rows x {cols} cols, b={block_size}, query length {rows // 2}")
    print(f"{'backend':<10}{'ingest s':>12}{'us/row':>10}{'query ms':>12}")
    for r in results:
        print(f"{r['backend']:<10}{r['ingest_s']:>12.3f}{1e6 * r['ingest_s'] / rows:>10.1f}{r['query_ms']:>12.3f}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--rows", type=int, default=20000)
    ap.add_argument("--cols", type=int, default=20)
    ap.add_argument("--block-size", type=int, default=100)
    ap.add_argument("--iterations", type=int, default=2000)
    args = ap.parse_args()
    print(f"numba available: {K.HAVE_NUMBA}")
    micro(args.iterations)
    end_to_end(args.rows, args.cols, args.block_size)


if __name__ == "__main__":
    main()
