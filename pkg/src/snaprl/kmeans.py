"""One-dimensional k-means: Lloyd iterations with k-means++ restarts.

Output clusters are canonicalized by ascending centroid so results are
stable for tests and serialization. If the data has fewer distinct values
than requested clusters, k is reduced to the distinct count (an empty
cluster is never returned).
"""

from __future__ import annotations

import numpy as np

MAX_ITERS = 200


def _kmeanspp_init(values: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = values.shape[0]
    centroids = np.empty(k, dtype=np.float64)
    centroids[0] = values[rng.integers(n)]
    d2 = (values - centroids[0]) ** 2
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            # all remaining points coincide with a chosen centroid
            centroids[j] = values[rng.integers(n)]
            continue
        r = rng.uniform(0.0, total)
        idx = int(np.searchsorted(np.cumsum(d2), r, side="right"))
        idx = min(idx, n - 1)
        centroids[j] = values[idx]
        d2 = np.minimum(d2, (values - centroids[j]) ** 2)
    return centroids


def _lloyd(
    values: np.ndarray, centroids: np.ndarray, max_iters: int = MAX_ITERS
) -> tuple[np.ndarray, np.ndarray, float, list[float]]:
    """Iterate to an assignment fixed point; returns the per-iteration SSE."""
    k = centroids.shape[0]
    assign = np.full(values.shape[0], -1, dtype=np.int64)
    sse_trace: list[float] = []
    for _ in range(max_iters):
        d2 = (values[:, None] - centroids[None, :]) ** 2
        new_assign = np.argmin(d2, axis=1)
        # repair empty clusters with the point farthest from its centroid
        counts = np.bincount(new_assign, minlength=k)
        if np.any(counts == 0):
            dist = d2[np.arange(values.shape[0]), new_assign].copy()
            for j in np.flatnonzero(counts == 0):
                idx = int(np.argmax(dist))
                new_assign[idx] = j
                dist[idx] = -1.0
        sse_trace.append(
            float(np.sum((values - centroids[new_assign]) ** 2))
        )
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for j in range(k):
            members = values[assign == j]
            if members.size:
                centroids[j] = members.mean()
    sse = float(np.sum((values - centroids[assign]) ** 2))
    return assign, centroids, sse, sse_trace


def kmeans_1d(
    values: np.ndarray | list[float],
    k: int,
    restarts: int = 16,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Cluster scalars into at most k groups; best of ``restarts`` by SSE.

    Returns (assignments, centroids) with centroids in ascending order.
    k is reduced to the number of distinct values when necessary.
    """
    vals = np.asarray(values, dtype=np.float64).ravel()
    if vals.size == 0:
        raise ValueError("cannot cluster an empty value list")
    if k < 1:
        raise ValueError("k must be >= 1")
    k = min(k, int(np.unique(vals).size))
    rng = np.random.default_rng(seed)
    best: tuple[float, np.ndarray, np.ndarray] | None = None
    for _ in range(max(1, restarts)):
        init = _kmeanspp_init(vals, k, rng)
        assign, centroids, sse, _ = _lloyd(vals, init)
        if best is None or sse < best[0] - 0.0:
            best = (sse, assign, centroids)
    _, assign, centroids = best
    order = np.argsort(centroids, kind="stable")
    remap = np.empty(k, dtype=np.int64)
    remap[order] = np.arange(k)
    return remap[assign], centroids[order]
