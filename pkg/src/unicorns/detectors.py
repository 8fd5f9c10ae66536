"""End-to-end detectors: series in, scores and detection mask out."""

from __future__ import annotations

from .embedding import EmbeddingParams, Series, embed
from .lof import lof_detect, lof_score
from .neighbors import build_index, knn_all
from .tof import DetectionMask, ScoreSeries, TofConfig, detect, threshold_from_event_length, tof_score


def neighbor_table(series: Series, params: EmbeddingParams, k: int):
    embedded = embed(series, params)
    return embedded, knn_all(build_index(embedded), k)


def run_tof(series: Series, params: EmbeddingParams, config: TofConfig) -> tuple[ScoreSeries, DetectionMask]:
    """Temporal outlier factor detection; ``config.max_event_len`` is in seconds."""
    config.validate(series.dt)
    embedded, table = neighbor_table(series, params, config.k)
    scores = tof_score(table, embedded.time_index, series.dt, config.q)
    theta = threshold_from_event_length(config.max_event_len, config.k, series.dt)
    return scores, detect(scores, theta, config.padding, len(series))


def run_lof(series: Series, params: EmbeddingParams, k: int, top_fraction: float):
    embedded, table = neighbor_table(series, params, k)
    scores = lof_score(table, embedded.time_index, series.dt)
    return scores, lof_detect(scores, top_fraction, len(series))
