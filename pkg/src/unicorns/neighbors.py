"""Exact k-nearest-neighbor search over embedded points.

The self point is the only exclusion: temporal neighbors are deliberately
kept, since the temporal outlier factor is built from them. Ties are broken
by the smaller time index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .embedding import EmbeddedSeries
from .errors import ParameterError

# relative slack for deciding that the k-th and (k+1)-th candidates may tie
_TIE_RTOL = 1e-9


@dataclass(frozen=True)
class NeighborTable:
    """Per-row neighbor indices and distances, ascending by (distance, index).

    ``points`` is kept so that consumers needing the full k-distance
    neighborhood (LOF under ties) can recover points beyond the k-th.
    """

    indices: np.ndarray
    distances: np.ndarray
    points: np.ndarray | None = None

    @property
    def k(self) -> int:
        return self.indices.shape[1]

    def __len__(self):
        return self.indices.shape[0]

    def truncate(self, k: int) -> "NeighborTable":
        """Table for a smaller neighborhood; a prefix thanks to the tie rule."""
        if not 1 <= k <= self.k:
            raise ParameterError(f"k must be in [1, {self.k}], got {k}")
        return NeighborTable(self.indices[:, :k], self.distances[:, :k], self.points)


def pair_distances(points: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Euclidean distance between ``points[rows]`` and ``points[cols]``.

    Coordinates are accumulated in a fixed order so every code path produces
    bit-identical distances for the same pair.
    """
    acc = np.zeros(np.broadcast_shapes(np.shape(rows), np.shape(cols)))
    for j in range(points.shape[1]):
        diff = points[rows, j] - points[cols, j]
        acc += diff * diff
    return np.sqrt(acc)


class SpatialIndex:
    """Immutable kd-tree over the rows of an embedded series."""

    def __init__(self, points: np.ndarray):
        points = np.array(points, dtype=np.float64, copy=True)
        if points.ndim != 2 or points.shape[0] < 2:
            raise ParameterError("spatial index needs at least 2 points")
        points.setflags(write=False)
        self.points = points
        self._tree = cKDTree(points)

    def __len__(self):
        return self.points.shape[0]

    def query(self, k: int) -> NeighborTable:
        n = len(self)
        if not 1 <= k <= n - 1:
            raise ParameterError(f"k must be in [1, {n - 1}], got {k}")
        m = min(k + 2, n)
        _, cand = self._tree.query(self.points, k=m)
        cand = cand.reshape(n, m)
        rows = np.arange(n)[:, None]

        # self may be missing from its own result list if it has many exact
        # duplicates; push it (or the surplus last column) to the end
        is_self = cand == rows
        has_self = is_self.any(axis=1)
        cand = np.where(is_self, -1, cand)
        cand[~has_self, -1] = -1
        dist = pair_distances(self.points, rows, np.where(cand < 0, rows, cand))
        dist[cand < 0] = np.inf
        order = np.lexsort((np.where(cand < 0, n, cand), dist), axis=1)
        cand = np.take_along_axis(cand, order, axis=1)[:, :m - 1]
        dist = np.take_along_axis(dist, order, axis=1)[:, :m - 1]

        indices = cand[:, :k].copy()
        distances = dist[:, :k].copy()
        if m - 1 > k:
            kth = distances[:, -1]
            ambiguous = np.flatnonzero(dist[:, k] <= kth * (1 + _TIE_RTOL))
        else:
            ambiguous = np.empty(0, dtype=int)
        for i in ambiguous:
            indices[i], distances[i] = self._resolve_ties(i, k, distances[i, -1])
        return NeighborTable(indices, distances, self.points)

    def _resolve_ties(self, i: int, k: int, radius: float):
        cand = np.asarray(self._tree.query_ball_point(self.points[i], radius * (1 + 2 * _TIE_RTOL)))
        cand = cand[cand != i]
        dist = pair_distances(self.points, np.full(cand.shape, i), cand)
        order = np.lexsort((cand, dist))[:k]
        return cand[order], dist[order]

    def ball(self, i: int, radius: float) -> np.ndarray:
        """Indices (self excluded) with distance to row ``i`` at most ``radius``."""
        cand = np.asarray(self._tree.query_ball_point(self.points[i], radius * (1 + 2 * _TIE_RTOL) + 1e-300), dtype=int)
        cand = cand[cand != i]
        dist = pair_distances(self.points, np.full(cand.shape, i), cand)
        keep = dist <= radius
        cand, dist = cand[keep], dist[keep]
        order = np.lexsort((cand, dist))
        return cand[order]


def build_index(embedded: EmbeddedSeries) -> SpatialIndex:
    points = embedded.points if isinstance(embedded, EmbeddedSeries) else embedded
    if len(points) < 2:
        raise ParameterError("spatial index needs at least 2 points")
    return SpatialIndex(points)


def knn_all(index: SpatialIndex, k: int) -> NeighborTable:
    """Exact k nearest neighbors of every indexed point (self excluded)."""
    return index.query(k)


def brute_force_knn(embedded: EmbeddedSeries, k: int, chunk: int = 512) -> NeighborTable:
    """O(N^2) reference implementation of :func:`knn_all`."""
    points = np.asarray(embedded.points if isinstance(embedded, EmbeddedSeries) else embedded,
                        dtype=np.float64)
    n = points.shape[0]
    if n < 2:
        raise ParameterError("need at least 2 points")
    if not 1 <= k <= n - 1:
        raise ParameterError(f"k must be in [1, {n - 1}], got {k}")
    indices = np.empty((n, k), dtype=np.intp)
    distances = np.empty((n, k))
    cols = np.arange(n)[None, :]
    for start in range(0, n, chunk):
        rows = np.arange(start, min(start + chunk, n))[:, None]
        d = pair_distances(points, rows, cols)
        d[np.arange(rows.shape[0]), rows[:, 0]] = np.inf
        # stable sort keeps ascending index order among equal distances
        order = np.argsort(d, axis=1, kind="stable")[:, :k]
        indices[rows[:, 0]] = order
        distances[rows[:, 0]] = np.take_along_axis(d, order, axis=1)
    return NeighborTable(indices, distances, points)
