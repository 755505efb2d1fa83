"""Distance metrics and nearest-neighbor matching over feature vectors.

The scan kernel has two interchangeable implementations: a compiled
extension (``_match_ext``, built from Cython at install time) and a plain
Python fallback (``_match_py``).  Both run the identical sequential
accumulation, so they return bit-identical indices and distances; the
compiled one is just faster.  Selection happens at import: the extension is
used when importable unless the ``CONFOUND_QUANT_NO_EXT`` environment
variable is set to a non-empty value.

Ties are deterministic by construction: callers pass candidates sorted by
record id, and the kernel keeps the first (lowest-index) minimum, so the
lexicographically smallest id wins.

The one-dimensional Wasserstein distance between two equal-length vectors,
treated as unweighted empirical samples, reduces to the mean absolute
difference of their sorted values; the kernel computes the aligned mean-abs
part and this module does the sorting.
"""

from __future__ import annotations

import os
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import ConfoundQuantError

from . import _match_py

if os.environ.get("CONFOUND_QUANT_NO_EXT"):
    _kernel = _match_py
else:
    try:
        from . import _match_ext as _kernel  # type: ignore[no-redef]
    except ImportError:
        _kernel = _match_py

BACKEND = "compiled" if _kernel.__name__.endswith("_match_ext") else "python"


class MatchingError(ConfoundQuantError):
    pass


class DistanceKind(str, Enum):
    EUCLIDEAN = "euclidean"
    MANHATTAN = "manhattan"
    CHEBYSHEV = "chebyshev"
    WASSERSTEIN = "wasserstein"


_METRIC_CODE = {
    DistanceKind.EUCLIDEAN: _match_py.METRIC_EUCLIDEAN,
    DistanceKind.MANHATTAN: _match_py.METRIC_MANHATTAN,
    DistanceKind.CHEBYSHEV: _match_py.METRIC_CHEBYSHEV,
    DistanceKind.WASSERSTEIN: _match_py.METRIC_ALIGNED_MEAN_ABS,
}


def backend_name() -> str:
    return BACKEND


def _as_matrix(rows: Sequence[Sequence[float]] | np.ndarray, label: str) -> np.ndarray:
    arr = np.ascontiguousarray(rows, dtype=np.float64)
    if arr.ndim != 2:
        raise MatchingError(f"{label} must be a 2-d array of feature rows")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise MatchingError(f"{label} must be non-empty")
    return arr


def _prepare(arr: np.ndarray, kind: DistanceKind) -> np.ndarray:
    if kind is DistanceKind.WASSERSTEIN:
        return np.ascontiguousarray(np.sort(arr, axis=1))
    return arr


def nn_match(
    queries: Sequence[Sequence[float]] | np.ndarray,
    candidates: Sequence[Sequence[float]] | np.ndarray,
    kind: DistanceKind = DistanceKind.EUCLIDEAN,
) -> tuple[np.ndarray, np.ndarray]:
    """Nearest candidate for every query row: (indices, distances).

    Matching is with replacement: several queries may share a candidate.
    """
    kind = DistanceKind(kind)
    q = _prepare(_as_matrix(queries, "queries"), kind)
    c = _prepare(_as_matrix(candidates, "candidates"), kind)
    if q.shape[1] != c.shape[1]:
        raise MatchingError(
            f"dimension mismatch: queries are {q.shape[1]}-d, "
            f"candidates are {c.shape[1]}-d"
        )
    return _kernel.nn_scan(q, c, _METRIC_CODE[kind])


def nearest_neighbor(
    query: Sequence[float] | np.ndarray,
    candidates: Sequence[Sequence[float]] | np.ndarray,
    kind: DistanceKind = DistanceKind.EUCLIDEAN,
) -> tuple[int, float]:
    """Index and distance of the candidate nearest to one query vector."""
    indices, dists = nn_match(np.atleast_2d(np.asarray(query, dtype=np.float64)),
                              candidates, kind)
    return int(indices[0]), float(dists[0])


def distance(
    u: Sequence[float] | np.ndarray,
    v: Sequence[float] | np.ndarray,
    kind: DistanceKind = DistanceKind.EUCLIDEAN,
) -> float:
    """Distance between two vectors under ``kind``.

    Computed through the same kernel as matching, so the value agrees
    bit-for-bit with what a scan would report.
    """
    ua = np.atleast_2d(np.asarray(u, dtype=np.float64))
    va = np.atleast_2d(np.asarray(v, dtype=np.float64))
    _, dists = nn_match(ua, va, kind)
    return float(dists[0])
