"""Benchmark: numba JIT kernels vs the pure-numpy fallback.

Times the operations that dominate a sampling run on two dataset scales
(benchmark-sized and mobility-table-sized) and verifies that both backends
return bit-identical scores. Run:

    python3 benchmarks/backend_bench.py [--quick]
"""

import argparse
import time

import numpy as np
from scipy.special import gammaln

from bdmpl.kernels import get_backend
from bdmpl.simbench import synthetic_sparse_dataset
from bdmpl.data import from_rows


def tables(alpha, r, n):
    t = np.arange(n + 1, dtype=np.float64)
    tc = gammaln(alpha + t) - gammaln(alpha)
    tc[0] = 0.0
    tp = gammaln(r * alpha) - gammaln(r * alpha + t)
    tp[0] = 0.0
    return tc, tp


def bench(fn, reps):
    fn()  # warm-up (JIT compilation on the numba side)
    t0 = time.perf_counter()
    for _ in range(reps):
        out = fn()
    return (time.perf_counter() - t0) / reps, out


def run_case(name, data, cols, reps):
    print(f"\n=== {name}: p={data.p}, cells={data.m}, n={data.n}, "
          f"conditioning on {len(cols)} variables ===")
    tc, tp = tables(0.5, 2, data.n)
    cols_arr = np.asarray(cols, dtype=np.int64)
    results = {}
    for backend_name in ("numba", "numpy"):
        try:
            k = get_backend(backend_name)
        except ImportError:
            print(f"{backend_name:>6}: unavailable")
            continue
        t_build, (gids, n_groups) = bench(
            lambda: k.build_groups(data.levels, cols_arr, data.cardinalities), reps)
        xi = data.levels[0]
        xj = data.levels[cols[-1] + 1]
        t_score, score = bench(
            lambda: k.score_groups(gids, n_groups, xi, 2, data.counts, tc, tp), reps)
        t_refine, refined = bench(
            lambda: k.score_groups_refine(gids, n_groups, xj, 2, xi, 2,
                                          data.counts, tc, tp), reps)
        results[backend_name] = (score, refined)
        print(f"{backend_name:>6}: build {t_build*1e3:8.3f} ms | "
              f"score {t_score*1e3:8.3f} ms | refine {t_refine*1e3:8.3f} ms")
    if len(results) == 2:
        match = all(results["numba"][i] == results["numpy"][i] for i in (0, 1))
        print(f"  bit-identical scores across backends: {match}")
        if not match:
            raise SystemExit("backend outputs diverged")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true",
                        help="fewer repetitions and the small case only")
    args = parser.parse_args()
    reps = 5 if args.quick else 25

    rng = np.random.default_rng(0)
    rows = rng.integers(0, 2, size=(1000, 20))
    small = from_rows(rows)
    run_case("benchmark-sized table", small, [2, 5, 9], reps)

    if not args.quick:
        big = synthetic_sparse_dataset(p=214, n_cells=55_000, seed=7)
        run_case("mobility-sized table", big, [3, 17, 40, 99, 150], reps)


if __name__ == "__main__":
    main()
