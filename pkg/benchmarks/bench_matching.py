"""Compare the compiled scan kernel against the pure-Python fallback.

Verifies that both backends return bit-identical indices and distances on
the benchmark inputs, then reports best-of-N wall times per metric.

Usage: python3 benchmarks/bench_matching.py [--queries N] [--candidates M]
"""

import argparse
import time

import numpy as np

from confound_quant import _match_py
from confound_quant.matching import DistanceKind, _METRIC_CODE

try:
    from confound_quant import _match_ext
except ImportError:
    _match_ext = None


def best_of(repeats, fn, *args):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--queries", type=int, default=200)
    parser.add_argument("--candidates", type=int, default=2000)
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if _match_ext is None:
        raise SystemExit("compiled extension not built; nothing to compare")

    rng = np.random.default_rng(args.seed)
    q = rng.normal(size=(args.queries, args.dim))
    c = rng.normal(size=(args.candidates, args.dim))

    print(f"{args.queries} queries x {args.candidates} candidates, "
          f"{args.dim}-d, best of {args.repeats}")
    print(f"{'metric':<12} {'compiled':>10} {'python':>10} {'speedup':>8}")
    for kind in DistanceKind:
        code = _METRIC_CODE[kind]
        ext_idx, ext_dist = _match_ext.nn_scan(q, c, code)
        py_idx, py_dist = _match_py.nn_scan(q, c, code)
        if not (np.array_equal(ext_idx, py_idx)
                and np.array_equal(ext_dist, py_dist)):
            raise SystemExit(f"backend mismatch on {kind.value}")
        t_ext = best_of(args.repeats, _match_ext.nn_scan, q, c, code)
        t_py = best_of(args.repeats, _match_py.nn_scan, q, c, code)
        print(f"{kind.value:<12} {t_ext * 1e3:>8.1f}ms {t_py * 1e3:>8.1f}ms "
              f"{t_py / t_ext:>7.1f}x")


if __name__ == "__main__":
    main()
