"""Local Outlier Factor on top of a :class:`NeighborTable`.

Neighborhoods follow the original k-distance definition, so under ties at the
k-th radius a neighborhood can hold more than ``k`` points. Expanding ties
needs ``table.points``; tables without points use their ``k`` columns as is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import ParameterError
from .neighbors import NeighborTable, pair_distances
from .tof import HIGH_IS_ANOMALOUS, DetectionMask, ScoreSeries


@dataclass(frozen=True)
class LofConfig:
    k: int
    top_fraction: float = 0.055

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ParameterError(f"k must be a positive integer, got {self.k}")
        if not 0 < self.top_fraction <= 1:
            raise ParameterError(f"top_fraction must be in (0, 1], got {self.top_fraction}")


@dataclass(frozen=True)
class _Neighborhoods:
    # CSR layout: members of row i are idx[ptr[i]:ptr[i+1]]
    ptr: np.ndarray
    idx: np.ndarray
    dist: np.ndarray

    @property
    def sizes(self):
        return np.diff(self.ptr)

    def owner(self):
        return np.repeat(np.arange(self.ptr.size - 1), self.sizes)


def _neighborhoods(table: NeighborTable) -> _Neighborhoods:
    n, k = table.indices.shape
    kdist = table.distances[:, -1]
    sizes = np.full(n, k)
    expanded = {}
    if table.points is not None:
        tree = cKDTree(table.points)
        radius = kdist * (1 + 2e-9) + 1e-300
        counts = tree.query_ball_point(table.points, radius, return_length=True) - 1
        for i in np.flatnonzero(counts > k):
            cand = np.asarray(tree.query_ball_point(table.points[i], radius[i]), dtype=np.intp)
            cand = cand[cand != i]
            d = pair_distances(table.points, np.full(cand.shape, i), cand)
            keep = d <= kdist[i]
            if keep.sum() > k:
                order = np.lexsort((cand[keep], d[keep]))
                expanded[i] = (cand[keep][order], d[keep][order])
                sizes[i] = keep.sum()
    ptr = np.concatenate(([0], np.cumsum(sizes)))
    idx = np.empty(ptr[-1], dtype=np.intp)
    dist = np.empty(ptr[-1])
    plain = np.ones(n, dtype=bool)
    plain[list(expanded)] = False
    pos = ptr[:-1][plain][:, None] + np.arange(k)
    idx[pos] = table.indices[plain]
    dist[pos] = table.distances[plain]
    for i, (ci, di) in expanded.items():
        idx[ptr[i]:ptr[i + 1]] = ci
        dist[ptr[i]:ptr[i + 1]] = di
    return _Neighborhoods(ptr, idx, dist)


def k_distance_neighborhood(table: NeighborTable, i: int) -> np.ndarray:
    """Indices within the k-distance of row ``i`` (self excluded)."""
    if not 0 <= i < len(table):
        raise ParameterError(f"row {i} out of range")
    kdist = table.distances[i, -1]
    if table.points is None:
        return table.indices[i].copy()
    n = len(table)
    cand = np.arange(n)
    cand = cand[cand != i]
    d = pair_distances(table.points, np.full(cand.shape, i), cand)
    members = cand[d <= kdist]
    order = np.lexsort((members, d[d <= kdist]))
    return members[order]


def _lrd(table: NeighborTable, hoods: _Neighborhoods) -> np.ndarray:
    kdist = table.distances[:, -1]
    reach = np.maximum(kdist[hoods.idx], hoods.dist)
    mean_reach = np.add.reduceat(reach, hoods.ptr[:-1]) / hoods.sizes
    with np.errstate(divide="ignore"):
        return 1.0 / mean_reach


def local_reachability_density(table: NeighborTable, i: int | None = None):
    """lrd of row ``i`` (or of every row); ``inf`` when all reach distances are 0."""
    lrd = _lrd(table, _neighborhoods(table))
    return lrd if i is None else float(lrd[i])


def lof_score(table: NeighborTable, time_index=None, dt: float = 1.0) -> ScoreSeries:
    """LOF of every row; about 1 inside clusters, larger for outliers.

    The ratio of two infinite densities (exact duplicates) counts as 1.
    """
    hoods = _neighborhoods(table)
    lrd = _lrd(table, hoods)
    owner = hoods.owner()
    num, den = lrd[hoods.idx], lrd[owner]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = num / den
    ratio[np.isinf(num) & np.isinf(den)] = 1.0
    lof = np.add.reduceat(ratio, hoods.ptr[:-1]) / hoods.sizes
    if time_index is None:
        time_index = np.arange(len(table))
    return ScoreSeries(lof, np.asarray(time_index), dt, HIGH_IS_ANOMALOUS)


def n_flagged(top_fraction: float, n: int) -> int:
    if not 0 < top_fraction <= 1:
        raise ParameterError(f"top_fraction must be in (0, 1], got {top_fraction}")
    return min(n, math.ceil(top_fraction * n - 1e-9))


def lof_detect(scores: ScoreSeries, top_fraction: float, n_original: int) -> DetectionMask:
    """Flag the ``ceil(top_fraction * N_e)`` highest-scoring rows.

    Equal scores are taken in ascending time order. No padding is applied.
    """
    m = n_flagged(top_fraction, len(scores))
    order = np.lexsort((scores.time_index, -scores.scores))[:m]
    flags = np.zeros(n_original, dtype=bool)
    hit = scores.time_index[order]
    flags[hit[(hit >= 0) & (hit < n_original)]] = True
    threshold = float(scores.scores[order[-1]]) if m else math.inf
    return DetectionMask(flags, threshold)
