"""Detection metrics, realization aggregates and the analyses behind the benchmark tables."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .errors import DataError
from .neighbors import NeighborTable
from .tof import DetectionMask, ScoreSeries


@dataclass
class EvalReport:
    precision: float = float("nan")
    recall: float = float("nan")
    f1: float = float("nan")
    roc_auc: float = float("nan")
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0
    degenerate: list = field(default_factory=list)

    def as_dict(self):
        return dict(precision=self.precision, recall=self.recall, f1=self.f1, roc_auc=self.roc_auc,
                    tp=self.tp, fp=self.fp, fn=self.fn, tn=self.tn)


def precision_recall_f1(mask, truth) -> EvalReport:
    """Pointwise precision, recall and F1.

    An empty denominator yields 0 and is listed in ``degenerate``.
    """
    flags = np.asarray(mask.flags if isinstance(mask, DetectionMask) else mask, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if flags.shape != truth.shape:
        raise DataError(f"mask length {flags.size} differs from truth length {truth.size}")
    tp = int(np.sum(flags & truth))
    fp = int(np.sum(flags & ~truth))
    fn = int(np.sum(~flags & truth))
    tn = int(np.sum(~flags & ~truth))
    report = EvalReport(tp=tp, fp=fp, fn=fn, tn=tn)
    if tp + fp:
        report.precision = tp / (tp + fp)
    else:
        report.precision = 0.0
        report.degenerate.append("precision")
    if tp + fn:
        report.recall = tp / (tp + fn)
    else:
        report.recall = 0.0
        report.degenerate.append("recall")
    p, r = report.precision, report.recall
    report.f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return report


def roc_auc(scores, truth) -> float:
    """Area under the ROC curve from the Mann-Whitney statistic with midranks.

    ``scores`` may be a :class:`ScoreSeries` (its orientation is honored and
    ``truth`` is read at its ``time_index``) or an array where larger means
    more anomalous.
    """
    truth = np.asarray(truth, dtype=bool)
    if isinstance(scores, ScoreSeries):
        if truth.size != len(scores):
            truth = truth[scores.time_index]
        values = scores.anomaly_score()
    else:
        values = np.asarray(scores, dtype=np.float64)
    if values.shape != truth.shape:
        raise DataError(f"scores length {values.size} differs from truth length {truth.size}")
    n_pos = int(truth.sum())
    n_neg = truth.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError("ROC AUC needs both anomalous and normal samples")
    ranks = rankdata(values)
    return float((ranks[truth].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def median_mad(values) -> tuple[float, float]:
    """Median and median absolute deviation around it (nan-aware)."""
    values = np.asarray(values, dtype=np.float64)
    values = values[np.isfinite(values)]
    if values.size == 0:
        return float("nan"), float("nan")
    med = float(np.median(values))
    return med, float(np.median(np.abs(values - med)))


def spearman(x, y) -> float:
    """Spearman rank correlation; 0 when either input is constant."""
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    if x.size != y.size or x.size < 2:
        raise DataError("spearman needs two equally long inputs with at least 2 values")
    rx, ry = rankdata(x), rankdata(y)
    rx -= rx.mean()
    ry -= ry.mean()
    den = np.sqrt(np.dot(rx, rx) * np.dot(ry, ry))
    return 0.0 if den == 0 else float(np.dot(rx, ry) / den)


def state_space_density(table: NeighborTable, truth_rows) -> dict:
    """Inverse k-th neighbor distance, summarized per class.

    Zero distances give infinite densities; they are left out of the medians
    and counted under ``n_infinite``.
    """
    truth_rows = np.asarray(truth_rows, dtype=bool)
    if truth_rows.size != len(table):
        raise DataError("truth length differs from the neighbor table")
    kdist = table.distances[:, -1]
    with np.errstate(divide="ignore"):
        density = 1.0 / kdist
    out = {"density": density}
    for name, sel in (("normal", ~truth_rows), ("anomaly", truth_rows)):
        vals = density[sel]
        med, mad = median_mad(vals)
        out[name] = dict(median=med, mad=mad, n=int(sel.sum()), n_infinite=int(np.isinf(vals).sum()))
    return out
