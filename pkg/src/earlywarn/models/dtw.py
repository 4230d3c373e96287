"""Dynamic time warping distances over multivariate weekly series.

The alignment cost between two univariate sequences is the classic
unconstrained DP with absolute-difference local cost and steps (1,0), (0,1),
(1,1). Multivariate distance is the sum of per-channel univariate distances.
Inner loops are compiled with numba when it is available; a pure-Python
fallback keeps results identical (same arithmetic, same order).
"""

from __future__ import annotations

import logging

import numpy as np

from ..errors import EmptySeriesError, ShapeMismatchError

logger = logging.getLogger(__name__)

try:
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap

    prange = range


@njit(cache=True)
def _dtw_1d(a: np.ndarray, b: np.ndarray) -> float:
    """Univariate DTW cost with two rolling DP rows."""
    n, m = a.shape[0], b.shape[0]
    prev = np.empty(m)
    curr = np.empty(m)
    prev[0] = abs(a[0] - b[0])
    for j in range(1, m):
        prev[j] = prev[j - 1] + abs(a[0] - b[j])
    for i in range(1, n):
        curr[0] = prev[0] + abs(a[i] - b[0])
        for j in range(1, m):
            best = prev[j]
            if prev[j - 1] < best:
                best = prev[j - 1]
            if curr[j - 1] < best:
                best = curr[j - 1]
            curr[j] = best + abs(a[i] - b[j])
        prev, curr = curr, prev
    return prev[m - 1]


@njit(cache=True, parallel=True)
def _dtw_cross(queries: np.ndarray, corpus: np.ndarray) -> np.ndarray:
    """All pairwise multivariate DTW distances, channels summed.

    queries: (nq, t1, c); corpus: (nc, t2, c); returns (nq, nc).
    """
    nq, nc = queries.shape[0], corpus.shape[0]
    channels = queries.shape[2]
    out = np.empty((nq, nc))
    for qi in prange(nq):
        for ci in range(nc):
            total = 0.0
            for ch in range(channels):
                total += _dtw_1d(np.ascontiguousarray(queries[qi, :, ch]),
                                 np.ascontiguousarray(corpus[ci, :, ch]))
            out[qi, ci] = total
    return out


def dtw_distance(a: np.ndarray, b: np.ndarray) -> float:
    """DTW distance between two (weeks, channels) series.

    1-d inputs are treated as single-channel series.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeMismatchError(
            f"expected (weeks, channels) series, got {a.shape} and {b.shape}")
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise EmptySeriesError("cannot align an empty series")
    if a.shape[1] != b.shape[1]:
        raise ShapeMismatchError(
            f"channel counts differ: {a.shape[1]} vs {b.shape[1]}")
    return float(sum(_dtw_1d(np.ascontiguousarray(a[:, ch]),
                             np.ascontiguousarray(b[:, ch]))
                     for ch in range(a.shape[1])))


def dtw_cross_distances(queries: np.ndarray, corpus: np.ndarray) -> np.ndarray:
    """Distance matrix between every query and every corpus series."""
    queries = np.ascontiguousarray(queries, dtype=np.float64)
    corpus = np.ascontiguousarray(corpus, dtype=np.float64)
    if queries.ndim != 3 or corpus.ndim != 3:
        raise ShapeMismatchError("expected (n, weeks, channels) stacks")
    if queries.shape[2] != corpus.shape[2]:
        raise ShapeMismatchError(
            f"channel counts differ: {queries.shape[2]} vs {corpus.shape[2]}")
    if queries.shape[1] == 0 or corpus.shape[1] == 0:
        raise EmptySeriesError("cannot align empty series")
    if queries.shape[0] == 0 or corpus.shape[0] == 0:
        return np.zeros((queries.shape[0], corpus.shape[0]))
    return _dtw_cross(queries, corpus)
