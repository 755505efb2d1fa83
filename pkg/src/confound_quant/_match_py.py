"""Pure-Python nearest-neighbor scan, the fallback for the compiled kernel.

Must stay behaviorally identical to ``_match_ext.nn_scan``: candidates are
scanned in index order and only a strictly smaller accumulated value
replaces the current best, so on exact ties the first candidate wins.
Accumulation runs over feature positions in order, mirroring the compiled
loop, so both backends see the same intermediate values on inputs whose
partial sums are exactly representable.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

METRIC_EUCLIDEAN = 0
METRIC_MANHATTAN = 1
METRIC_CHEBYSHEV = 2
METRIC_ALIGNED_MEAN_ABS = 3


def _row_accum(q: Sequence[float], c: Sequence[float], metric: int, bound: float) -> float:
    acc = 0.0
    if metric == METRIC_CHEBYSHEV:
        for qk, ck in zip(q, c):
            d = abs(qk - ck)
            if d > acc:
                acc = d
                if acc >= bound:
                    return acc
        return acc
    for qk, ck in zip(q, c):
        d = qk - ck
        if metric == METRIC_EUCLIDEAN:
            acc += d * d
        else:
            acc += abs(d)
        if acc >= bound:
            return acc
    return acc


def nn_scan(
    queries: np.ndarray, candidates: np.ndarray, metric: int
) -> tuple[np.ndarray, np.ndarray]:
    """For each query row, the index and distance of its nearest candidate."""
    queries = np.ascontiguousarray(queries, dtype=np.float64)
    candidates = np.ascontiguousarray(candidates, dtype=np.float64)
    if queries.ndim != 2 or candidates.ndim != 2:
        raise ValueError("expected 2-d arrays")
    if candidates.shape[1] != queries.shape[1]:
        raise ValueError("query and candidate dimensions differ")
    if candidates.shape[0] == 0:
        raise ValueError("no candidates")
    if metric not in (0, 1, 2, 3):
        raise ValueError(f"unknown metric code {metric}")

    nq = queries.shape[0]
    dim = queries.shape[1]
    indices = np.empty(nq, dtype=np.int64)
    dists = np.empty(nq, dtype=np.float64)
    qlist = queries.tolist()
    clist = candidates.tolist()
    for i, qrow in enumerate(qlist):
        best = float("inf")
        best_j = 0
        for j, crow in enumerate(clist):
            acc = _row_accum(qrow, crow, metric, best)
            if acc < best:
                best = acc
                best_j = j
        if metric == METRIC_EUCLIDEAN:
            best = math.sqrt(best)
        elif metric == METRIC_ALIGNED_MEAN_ABS:
            best = best / dim
        indices[i] = best_j
        dists[i] = best
    return indices, dists
