"""Temporal Outlier Factor: scores, analytic bounds, noise baselines, thresholds.

TOF of a state is the order-``q`` mean temporal distance between the state and
its ``k`` nearest state-space neighbors. Low values mean the neighborhood was
visited only once (a unique event). Scores carry time units (seconds).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstraintError, ParameterError
from .neighbors import NeighborTable

LOW_IS_ANOMALOUS = "low_is_anomalous"
HIGH_IS_ANOMALOUS = "high_is_anomalous"


@dataclass(frozen=True)
class TofConfig:
    k: int
    max_event_len: float
    q: float = 2.0
    pad_w: int | None = None

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ParameterError(f"k must be a positive integer, got {self.k}")
        if not self.q > 0:
            raise ParameterError(f"q must be positive, got {self.q}")
        if self.pad_w is not None and self.pad_w < 0:
            raise ParameterError(f"pad_w must be nonnegative, got {self.pad_w}")

    @property
    def padding(self) -> int:
        return self.k // 2 if self.pad_w is None else int(self.pad_w)

    def validate(self, dt: float):
        min_len = self.k * dt
        if min_len > self.max_event_len * (1 + 1e-12):
            raise ConstraintError(
                f"k*dt = {min_len:g} s exceeds max event length M = {self.max_event_len:g} s; "
                f"the minimal detectable event length is k*dt = {min_len:g} s"
            )


@dataclass(frozen=True)
class ScoreSeries:
    scores: np.ndarray
    time_index: np.ndarray
    dt: float
    orientation: str

    def __len__(self):
        return self.scores.size

    def anomaly_score(self) -> np.ndarray:
        """Scores oriented so that larger means more anomalous."""
        return -self.scores if self.orientation == LOW_IS_ANOMALOUS else self.scores


@dataclass(frozen=True)
class DetectionMask:
    flags: np.ndarray
    threshold_used: float

    def __len__(self):
        return self.flags.size


def tof_score(table: NeighborTable, time_index, dt: float = 1.0, q: float = 2.0) -> ScoreSeries:
    """TOF for every row of ``table``; in seconds when ``dt`` is."""
    if not q > 0:
        raise ParameterError(f"q must be positive, got {q}")
    time_index = np.asarray(time_index)
    if time_index.shape[0] != len(table):
        raise ParameterError("time_index length does not match the neighbor table")
    lag = np.abs(time_index[:, None] - time_index[table.indices]).astype(np.float64)
    if q == 2:
        tof = np.sqrt(np.mean(lag * lag, axis=1))
    elif q == 1:
        tof = np.mean(lag, axis=1)
    else:
        tof = np.mean(lag ** q, axis=1) ** (1.0 / q)
    return ScoreSeries(tof * dt, time_index, dt, LOW_IS_ANOMALOUS)


def tof_min(k: int, dt: float = 1.0) -> float:
    """Smallest attainable TOF (q=2) for neighborhood size ``k``."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    half = k // 2
    i = np.arange(-half, half + k % 2 + 1, dtype=np.float64)
    return float(np.sqrt(np.sum(i * i) / k) * dt)


def tof_max(k: int, n: int, dt: float = 1.0) -> float:
    """Approximate largest TOF (q=2) for ``n`` embedded samples."""
    if not 1 <= k < n:
        raise ParameterError(f"need 1 <= k < N, got k={k}, N={n}")
    return threshold_from_event_length(n * dt, k, dt)


def noise_baseline_mean(t, T: float, q: int = 2):
    """Expected TOF at time ``t`` for white noise of duration ``T``.

    ``q=2`` gives ``sqrt(<TOF^2>)``, ``q=1`` the exact mean of TOF.
    """
    t = _check_t(t, T)
    if q == 2:
        return np.sqrt(t * t - t * T + T * T / 3.0)
    if q == 1:
        return t * t / T - t + T / 2.0
    raise ParameterError(f"noise baseline is available for q in (1, 2), got {q}")


def noise_baseline_var(t, T: float, k: int, q_mode: str = "q2"):
    """White-noise variance: of TOF^2 for ``q2``, of TOF for ``q1``."""
    t = _check_t(t, T)
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if q_mode == "q2":
        second = t * t - t * T + T * T / 3.0
        var = (t ** 5 + (T - t) ** 5) / (5.0 * T) - second * second
    elif q_mode == "q1":
        var = -t ** 4 / T ** 2 + 2.0 * t ** 3 / T - t * t + T * T / 12.0
    else:
        raise ParameterError(f"q_mode must be 'q1' or 'q2', got {q_mode!r}")
    return var / k


def _check_t(t, T):
    if not T > 0:
        raise ParameterError(f"T must be positive, got {T}")
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0) or np.any(t > T):
        raise ParameterError("t must lie in [0, T]")
    return t if t.ndim else float(t)


def threshold_from_event_length(max_event_len: float, k: int, dt: float = 1.0) -> float:
    """TOF threshold that corresponds to a maximal event length (seconds)."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if k * dt > max_event_len * (1 + 1e-12):
        raise ConstraintError(
            f"k*dt = {k * dt:g} exceeds M = {max_event_len:g}; "
            f"the minimal detectable event length is k*dt = {k * dt:g}"
        )
    terms = max_event_len - dt * np.arange(k)
    return float(np.sqrt(np.sum(terms * terms) / k))


def event_length_threshold_rule(l_min: float, l_max: float) -> float:
    """Midpoint rule for M when anomaly lengths are known to lie in [l_min, l_max]."""
    return (l_max + l_min) / 2.0


def dilate(flags: np.ndarray, pad_w: int) -> np.ndarray:
    """Widen every True run by ``pad_w`` samples on both sides."""
    flags = np.asarray(flags, dtype=bool)
    if pad_w <= 0 or not flags.any():
        return flags.copy()
    out = flags.copy()
    for shift in range(1, pad_w + 1):
        out[shift:] |= flags[:-shift]
        out[:-shift] |= flags[shift:]
    return out


def detect(scores: ScoreSeries, threshold: float, pad_w: int, n_original: int) -> DetectionMask:
    """Flag rows scoring below ``threshold`` and map them onto the original series.

    Row ``i`` lands on original sample ``time_index[i]``; the flag set is then
    dilated by ``pad_w`` samples and clipped to the series.
    """
    flags = np.zeros(n_original, dtype=bool)
    hit = scores.time_index[scores.scores < threshold]
    flags[hit[(hit >= 0) & (hit < n_original)]] = True
    return DetectionMask(dilate(flags, pad_w), float(threshold))
