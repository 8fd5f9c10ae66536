"""Benchmark families and the sweeps that regenerate the performance tables.

Each family bundles a generator with the analysis settings used on it:
embedding, preprocessing, maximal event length ``M`` (seconds of the analysed
series) and LOF detection fraction.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Callable

import numpy as np

from . import ecg, simulators
from .embedding import EmbeddingParams, Series, embed
from .errors import ParameterError
from .evaluation import EvalReport, median_mad, precision_recall_f1, roc_auc, spearman, state_space_density
from .lof import lof_detect, lof_score
from .neighbors import build_index, knn_all
from .preprocess import align_mask, first_difference, log_difference
from .simulators import LabeledDataset
from .tof import TofConfig, detect, event_length_threshold_rule, threshold_from_event_length, tof_score

DETECTORS = ("tof", "lof")
PREPROCESSORS = {None: None, "log_difference": log_difference, "first_difference": first_difference}


@dataclass(frozen=True)
class Family:
    name: str
    generate: Callable[[int], LabeledDataset]
    embedding: EmbeddingParams
    max_event_len: float
    top_fraction: float
    preprocess: str | None = None
    tof_k: int = 4
    lof_k: int = 28


FAMILIES = {
    f.name: f for f in (
        Family("logistic-tent", simulators.gen_logistic_tent, EmbeddingParams(3, 1),
               event_length_threshold_rule(20, 200), 0.055),
        Family("logistic-linear", simulators.gen_logistic_linear, EmbeddingParams(3, 1),
               event_length_threshold_rule(20, 200), 0.055),
        Family("randwalk-linear", simulators.gen_randwalk_linear, EmbeddingParams(3, 1),
               event_length_threshold_rule(20, 200), 0.055, preprocess="log_difference", lof_k=1),
        Family("ecg", ecg.gen_ecg, EmbeddingParams(3, 1),
               event_length_threshold_rule(2.0, 20.0), 0.11, lof_k=99),
        Family("logistic-double-tent", simulators.gen_logistic_double_tent, EmbeddingParams(3, 1),
               event_length_threshold_rule(20, 200), 0.055),
    )
}


def get_family(name: str) -> Family:
    try:
        return FAMILIES[name]
    except KeyError:
        raise ParameterError(f"unknown dataset family {name!r}; choose from {sorted(FAMILIES)}") from None


def prepare(dataset: LabeledDataset, preprocess: str | None) -> tuple[Series, np.ndarray]:
    """Apply preprocessing and keep the labels aligned with the result."""
    if preprocess not in PREPROCESSORS:
        raise ParameterError(f"unknown preprocessing {preprocess!r}")
    if preprocess is None:
        return dataset.series, dataset.anomaly_mask
    return PREPROCESSORS[preprocess](dataset.series), align_mask(dataset.anomaly_mask, 1)


def _table(series, params, k):
    embedded = embed(series, params)
    return embedded, knn_all(build_index(embedded), k)


def auc_by_k(dataset: LabeledDataset, family: Family, detector: str, ks) -> dict:
    """ROC AUC of one realization for every ``k`` (one neighbor search)."""
    series, truth = prepare(dataset, family.preprocess)
    ks = sorted(set(int(k) for k in ks))
    embedded, table = _table(series, family.embedding, ks[-1])
    truth_rows = truth[embedded.time_index]
    out = {}
    for k in ks:
        sub = table.truncate(k)
        if detector == "tof":
            scores = tof_score(sub, embedded.time_index, series.dt)
        elif detector == "lof":
            scores = lof_score(sub, embedded.time_index, series.dt)
        else:
            raise ParameterError(f"detector must be one of {DETECTORS}, got {detector!r}")
        out[k] = roc_auc(scores.anomaly_score(), truth_rows)
    return out


def evaluate_realization(dataset: LabeledDataset, family: Family, detector: str, k: int,
                         max_event_len: float | None = None,
                         top_fraction: float | None = None) -> EvalReport:
    """Thresholded detection plus ROC AUC for one realization."""
    series, truth = prepare(dataset, family.preprocess)
    embedded, table = _table(series, family.embedding, k)
    if detector == "tof":
        m = family.max_event_len if max_event_len is None else max_event_len
        TofConfig(k, m).validate(series.dt)
        scores = tof_score(table, embedded.time_index, series.dt)
        theta = threshold_from_event_length(m, k, series.dt)
        mask = detect(scores, theta, k // 2, len(series))
    elif detector == "lof":
        scores = lof_score(table, embedded.time_index, series.dt)
        frac = family.top_fraction if top_fraction is None else top_fraction
        mask = lof_detect(scores, frac, len(series))
    else:
        raise ParameterError(f"detector must be one of {DETECTORS}, got {detector!r}")
    report = precision_recall_f1(mask, truth)
    report.roc_auc = roc_auc(scores, truth)
    return report


def _map(fn, items, workers):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _auc_job(seed, family_name, detector, ks):
    family = get_family(family_name)
    return auc_by_k(family.generate(seed), family, detector, ks)


def k_sweep(family_name: str, detector: str, seeds, ks=range(1, 101), workers: int = 1) -> dict:
    """Median ROC AUC and MAD over realizations for each neighborhood size."""
    seeds = list(seeds)
    ks = sorted(set(int(k) for k in ks))
    per_seed = _map(partial(_auc_job, family_name=family_name, detector=detector, ks=ks), seeds, workers)
    auc = np.array([[res[k] for k in ks] for res in per_seed])
    rows = []
    for j, k in enumerate(ks):
        med, mad = median_mad(auc[:, j])
        rows.append(dict(k=k, median=med, mad=mad))
    best = max(rows, key=lambda r: r["median"])
    return dict(family=family_name, detector=detector, seeds=seeds, ks=ks, auc=auc, rows=rows, best=best)


def _report_job(seed, family_name, detector, k):
    family = get_family(family_name)
    return evaluate_realization(family.generate(seed), family, detector, k)


def f1_summary(family_name: str, detector: str, seeds, k: int | None = None, workers: int = 1) -> dict:
    """Median and MAD of F1, precision, recall and AUC at fixed ``k``."""
    family = get_family(family_name)
    if k is None:
        k = family.tof_k if detector == "tof" else family.lof_k
    seeds = list(seeds)
    reports = _map(partial(_report_job, family_name=family_name, detector=detector, k=k), seeds, workers)
    out = dict(family=family_name, detector=detector, k=k, seeds=seeds, reports=reports)
    for metric in ("f1", "precision", "recall", "roc_auc"):
        out[metric] = median_mad([getattr(r, metric) for r in reports])
    return out


def _iei_job(seed, tof_k, lof_k):
    family = get_family("logistic-double-tent")
    dataset = family.generate(seed)
    tof = auc_by_k(dataset, family, "tof", [tof_k])[tof_k]
    lof = auc_by_k(dataset, family, "lof", [lof_k])[lof_k]
    return dataset.meta["iei"], tof, lof


def iei_analysis(seeds, tof_k: int = 4, lof_k: int = 28, n_bins: int = 5, workers: int = 1) -> dict:
    """ROC AUC against inter-event interval on double-anomaly realizations.

    Reports Spearman correlations and per-quantile-bin median AUCs.
    """
    seeds = list(seeds)
    res = _map(partial(_iei_job, tof_k=tof_k, lof_k=lof_k), seeds, workers)
    iei = np.array([r[0] for r in res], dtype=float)
    auc_tof = np.array([r[1] for r in res])
    auc_lof = np.array([r[2] for r in res])
    order = np.argsort(iei, kind="stable")
    bins = []
    for chunk in np.array_split(order, n_bins):
        if chunk.size == 0:
            continue
        bins.append(dict(iei_min=float(iei[chunk].min()), iei_max=float(iei[chunk].max()), n=int(chunk.size),
                         tof_median=float(np.median(auc_tof[chunk])),
                         lof_median=float(np.median(auc_lof[chunk]))))
    lof_meds = [b["lof_median"] for b in bins]
    return dict(seeds=seeds, iei=iei, auc_tof=auc_tof, auc_lof=auc_lof,
                spearman_tof=spearman(iei, auc_tof), spearman_lof=spearman(iei, auc_lof),
                bins=bins, lof_bin_range=float(max(lof_meds) - min(lof_meds)))


def _density_job(seed, family_name, k):
    family = get_family(family_name)
    dataset = family.generate(seed)
    series, truth = prepare(dataset, family.preprocess)
    embedded, table = _table(series, family.embedding, k)
    truth_rows = truth[embedded.time_index]
    dens = state_space_density(table, truth_rows)
    lof = lof_score(table).scores
    return (dens["normal"]["median"], dens["anomaly"]["median"],
            float(np.median(lof[~truth_rows])), float(np.median(lof[truth_rows])))


def density_summary(family_name: str, seeds, k: int = 20, workers: int = 1) -> dict:
    """Per-class state-space density and LOF, median and MAD over realizations."""
    seeds = list(seeds)
    res = np.array(_map(partial(_density_job, family_name=family_name, k=k), seeds, workers))
    return dict(family=family_name, k=k, seeds=seeds,
                density_normal=median_mad(res[:, 0]), density_anomaly=median_mad(res[:, 1]),
                lof_normal=median_mad(res[:, 2]), lof_anomaly=median_mad(res[:, 3]))


TABLE_FAMILIES = ("logistic-tent", "logistic-linear", "ecg", "randwalk-linear")


def table_auc(realizations: int = 100, ks=range(1, 101), families=TABLE_FAMILIES,
              seed0: int = 0, workers: int = 1) -> list[dict]:
    """Best median ROC AUC and its ``k`` for TOF and LOF on every family."""
    rows = []
    for name in families:
        seeds = range(seed0, seed0 + realizations)
        row = dict(dataset=name)
        for det in DETECTORS:
            sweep = k_sweep(name, det, seeds, ks, workers)
            row[f"{det}_k"] = sweep["best"]["k"]
            row[f"{det}_auc"] = sweep["best"]["median"]
            row[f"{det}_mad"] = sweep["best"]["mad"]
        rows.append(row)
    return rows


def table_f1(realizations: int = 100, families=TABLE_FAMILIES, seed0: int = 0, workers: int = 1) -> list[dict]:
    """F1, precision and recall with TOF at k=4 and LOF at each family's k."""
    rows = []
    for name in families:
        seeds = range(seed0, seed0 + realizations)
        row = dict(dataset=name)
        for det in DETECTORS:
            s = f1_summary(name, det, seeds, workers=workers)
            for metric in ("f1", "precision", "recall"):
                row[f"{det}_{metric}"], row[f"{det}_{metric}_mad"] = s[metric]
        rows.append(row)
    return rows


def table_density(realizations: int = 100, k: int = 20, families=TABLE_FAMILIES,
                  seed0: int = 0, workers: int = 1) -> list[dict]:
    rows = []
    for name in families:
        s = density_summary(name, range(seed0, seed0 + realizations), k, workers)
        row = dict(dataset=name)
        for key in ("density_normal", "density_anomaly", "lof_normal", "lof_anomaly"):
            row[key], row[key + "_mad"] = s[key]
        rows.append(row)
    return rows
