# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled nearest-neighbor scan over feature vectors.

Same contract as ``_match_py.nn_scan``; candidates are scanned in index
order with a strict less-than update so the first minimum wins, and
accumulation bails out early once a partial sum can no longer beat the
current best.  Partial sums only grow, so early exit never changes the
selected index.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

cdef enum:
    _EUCLIDEAN = 0
    _MANHATTAN = 1
    _CHEBYSHEV = 2
    _ALIGNED_MEAN_ABS = 3

METRIC_EUCLIDEAN = _EUCLIDEAN
METRIC_MANHATTAN = _MANHATTAN
METRIC_CHEBYSHEV = _CHEBYSHEV
METRIC_ALIGNED_MEAN_ABS = _ALIGNED_MEAN_ABS


cdef inline double _row_accum(const double[:, ::1] q, const double[:, ::1] c,
                              Py_ssize_t qi, Py_ssize_t ci, Py_ssize_t dim,
                              int metric, double bound) noexcept nogil:
    # Returns the (possibly partial) accumulated value; any value >= bound
    # means "cannot win" and the caller discards it.
    cdef double acc = 0.0
    cdef double d
    cdef Py_ssize_t k
    if metric == _CHEBYSHEV:
        for k in range(dim):
            d = fabs(q[qi, k] - c[ci, k])
            if d > acc:
                acc = d
                if acc >= bound:
                    return acc
        return acc
    for k in range(dim):
        d = q[qi, k] - c[ci, k]
        if metric == _EUCLIDEAN:
            acc += d * d
        else:
            acc += fabs(d)
        if acc >= bound:
            return acc
    return acc


def nn_scan(const double[:, ::1] queries not None,
            const double[:, ::1] candidates not None,
            int metric):
    """For each query row, the index and distance of its nearest candidate."""
    cdef Py_ssize_t nq = queries.shape[0]
    cdef Py_ssize_t nc = candidates.shape[0]
    cdef Py_ssize_t dim = queries.shape[1]
    if candidates.shape[1] != dim:
        raise ValueError("query and candidate dimensions differ")
    if nc == 0:
        raise ValueError("no candidates")
    if metric < 0 or metric > 3:
        raise ValueError(f"unknown metric code {metric}")

    indices = np.empty(nq, dtype=np.int64)
    dists = np.empty(nq, dtype=np.float64)
    cdef cnp.int64_t[::1] ind_v = indices
    cdef double[::1] dist_v = dists
    cdef Py_ssize_t i, j
    cdef double best, acc
    cdef Py_ssize_t best_j
    cdef double inf = np.inf

    with nogil:
        for i in range(nq):
            best = inf
            best_j = 0
            for j in range(nc):
                acc = _row_accum(queries, candidates, i, j, dim, metric, best)
                if acc < best:
                    best = acc
                    best_j = j
            if metric == _EUCLIDEAN:
                best = sqrt(best)
            elif metric == _ALIGNED_MEAN_ABS:
                best = best / dim
            ind_v[i] = best_j
            dist_v[i] = best
    return indices, dists
