"""Labeled benchmark series: chaotic maps and random walks with inserted anomalies.

Every generator is a pure function of its seed and parameters; numpy's PCG64
bit generator is used and recorded in ``meta``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embedding import Series
from .errors import DataError, NumericError, ParameterError

RNG_NAME = "numpy.random.PCG64"
TENT_OFFSET, TENT_SLOPE, TENT_PEAK, TENT_DRIFT = 1.59, 2.15, 0.7, 0.9


@dataclass
class LabeledDataset:
    series: Series
    anomaly_mask: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.anomaly_mask = np.asarray(self.anomaly_mask, dtype=bool)
        if self.anomaly_mask.size != len(self.series):
            raise DataError("anomaly mask length differs from the series length")

    def __len__(self):
        return len(self.series)

    @property
    def spans(self):
        return [tuple(s) for s in self.meta.get("spans", [])]


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def logistic_step(x: float, r: float = 3.9) -> float:
    return r * x * (1.0 - x)


def tent_step(x: float) -> float:
    return TENT_OFFSET - TENT_SLOPE * abs(x - TENT_PEAK) - TENT_DRIFT * x


def _reflect_unit(x: float) -> tuple[float, bool]:
    if 0.0 <= x <= 1.0:
        return x, False
    x = -x if x < 0 else 2.0 - x
    return min(max(x, 0.0), 1.0), True


def _check_len_range(len_range, n, low=1):
    lo, hi = int(len_range[0]), int(len_range[1])
    if not (low <= lo <= hi < n):
        raise ParameterError(f"len_range must satisfy {low} <= min <= max < N, got {len_range}")
    return lo, hi


def _draw_span(rng, n, len_range, margin=0):
    # span [start, start+L) with 1 <= start and start+L+margin <= n
    lo, hi = len_range
    length = int(rng.integers(lo, hi + 1))
    start = int(rng.integers(1, n - length - margin + 1))
    return start, length


def _span_mask(n, spans):
    mask = np.zeros(n, dtype=bool)
    for start, length in spans:
        mask[start:start + length] = True
    return mask


def _logistic_with_spans(rng, n, r, spans, anomaly, retries=100):
    in_span = _span_mask(n, spans)
    for _ in range(retries):
        x = np.empty(n)
        x[0] = rng.uniform(0.0, 1.0)
        state = {"slope": None, "reflections": 0}
        for t in range(1, n):
            if in_span[t]:
                if not in_span[t - 1]:
                    state["slope"] = None
                x[t] = anomaly(x[t - 1], state)
            else:
                x[t] = logistic_step(x[t - 1], r)
        if np.all((x >= 0.0) & (x <= 1.0)) and np.all(x[1:] != x[:-1]):
            return x, state["reflections"]
    raise NumericError(f"trajectory left [0, 1] or stalled in {retries} attempts")


def _tent_anomaly(x, state):
    value, reflected = _reflect_unit(tent_step(x))
    state["reflections"] += reflected
    return value


def _linear_anomaly(slope):
    def step(x, state):
        if state["slope"] is None:
            state["slope"] = abs(slope)
        nxt = state["slope"] * x + x
        if nxt >= 1.0 or nxt <= 0.0:
            state["slope"] = -state["slope"]
            state["reflections"] += 1
            nxt = state["slope"] * x + x
        return nxt
    return step


def gen_logistic_tent(seed, n: int = 2000, r: float = 3.9, len_range=(20, 200)) -> LabeledDataset:
    """Logistic map background with one tent-map segment."""
    len_range = _check_len_range(len_range, n)
    rng = make_rng(seed)
    span = _draw_span(rng, n, len_range)
    x, reflections = _logistic_with_spans(rng, n, r, [span], _tent_anomaly)
    meta = dict(generator="logistic-tent", seed=seed, rng=RNG_NAME, spans=[list(span)],
                params=dict(n=n, r=r, len_range=list(len_range)), reflections=reflections)
    return LabeledDataset(Series(x), _span_mask(n, [span]), meta)


def gen_logistic_linear(seed, n: int = 2000, r: float = 3.9, slope: float = 0.001,
                        len_range=(20, 200)) -> LabeledDataset:
    """Logistic map background with one slowly drifting linear segment.

    Inside the segment ``x_{t+1} = (1 + a) x_t``; ``a`` starts positive and
    flips sign at the borders of (0, 1).
    """
    len_range = _check_len_range(len_range, n)
    rng = make_rng(seed)
    span = _draw_span(rng, n, len_range)
    x, reflections = _logistic_with_spans(rng, n, r, [span], _linear_anomaly(slope))
    meta = dict(generator="logistic-linear", seed=seed, rng=RNG_NAME, spans=[list(span)],
                params=dict(n=n, r=r, slope=slope, len_range=list(len_range)),
                reflections=reflections)
    return LabeledDataset(Series(x), _span_mask(n, [span]), meta)


def gen_logistic_double_tent(seed, n: int = 2000, r: float = 3.9, len_range=(20, 200),
                             attempts: int = 1000) -> LabeledDataset:
    """Two disjoint tent-map segments; ``meta['iei']`` is the gap between them."""
    len_range = _check_len_range(len_range, n)
    rng = make_rng(seed)
    for _ in range(attempts):
        spans = sorted([_draw_span(rng, n, len_range), _draw_span(rng, n, len_range)])
        (s1, l1), (s2, _) = spans
        if s2 > s1 + l1:
            break
    else:
        raise ParameterError(f"could not place two disjoint spans in {attempts} attempts")
    x, reflections = _logistic_with_spans(rng, n, r, spans, _tent_anomaly)
    meta = dict(generator="logistic-double-tent", seed=seed, rng=RNG_NAME,
                spans=[list(s) for s in spans], iei=int(s2 - (s1 + l1)),
                params=dict(n=n, r=r, len_range=list(len_range)), reflections=reflections)
    return LabeledDataset(Series(x), _span_mask(n, spans), meta)


def gen_randwalk_linear(seed, n: int = 2000, mu: float = 0.001, sigma: float = 0.01,
                        len_range=(2, 200)) -> LabeledDataset:
    """Multiplicative random walk with one linearly interpolated segment.

    ``x_i = prod_{j<=i} (1 + w_j)`` with ``w ~ N(mu, sigma)``. The segment
    values are replaced by ``L`` equally spaced points strictly between the
    samples just before and just after it.
    """
    if not sigma > 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    len_range = _check_len_range(len_range, n - 1)
    rng = make_rng(seed)
    w = rng.normal(mu, sigma, size=n)
    bad = 1.0 + w <= 0.0
    while bad.any():
        w[bad] = rng.normal(mu, sigma, size=int(bad.sum()))
        bad = 1.0 + w <= 0.0
    x = np.cumprod(1.0 + w)
    start, length = _draw_span(rng, n, len_range, margin=1)
    x[start:start + length] = linear_bridge(x[start - 1], x[start + length], length)
    meta = dict(generator="randwalk-linear", seed=seed, rng=RNG_NAME, spans=[[start, length]],
                params=dict(n=n, mu=mu, sigma=sigma, len_range=list(len_range)))
    return LabeledDataset(Series(x), _span_mask(n, [(start, length)]), meta)


def linear_bridge(v0: float, v1: float, length: int) -> np.ndarray:
    """``length`` equally spaced values strictly between ``v0`` and ``v1``."""
    return np.linspace(v0, v1, length + 2)[1:-1]


def add_observation_noise(dataset: LabeledDataset, sigma: float, seed) -> LabeledDataset:
    """Copy of ``dataset`` with additive Gaussian observation noise."""
    if sigma < 0:
        raise ParameterError(f"sigma must be nonnegative, got {sigma}")
    rng = make_rng(seed)
    values = dataset.series.values + rng.normal(0.0, sigma, size=len(dataset))
    meta = dict(dataset.meta, noise_sigma=sigma, noise_seed=seed)
    series = Series(values, dataset.series.dt, dataset.series.t0)
    return LabeledDataset(series, dataset.anomaly_mask.copy(), meta)


def save_dataset(dataset: LabeledDataset, path) -> tuple[Path, Path]:
    """Write ``t,value,label`` CSV plus a JSON sidecar ``<path>.json``."""
    path = Path(path)
    s = dataset.series
    lines = ["t,value,label"]
    for t, v, lab in zip(s.times, s.values, dataset.anomaly_mask):
        lines.append(f"{float(t)!r},{float(v)!r},{int(lab)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    meta = dict(dataset.meta, dt=s.dt, t0=s.t0, n=len(s))
    sidecar = path.with_name(path.name + ".json")
    sidecar.write_text(json.dumps(_jsonable(meta), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path, sidecar


def load_dataset(path) -> LabeledDataset:
    """Inverse of :func:`save_dataset`."""
    from .preprocess import load_series, read_sidecar

    path = Path(path)
    series = load_series(path, "csv_t_value")
    labels = _read_label_column(path)
    meta = read_sidecar(path) or {}
    return LabeledDataset(series, labels, meta)


def _read_label_column(path):
    rows = Path(path).read_text(encoding="utf-8").splitlines()
    header = [c.strip() for c in rows[0].split(",")]
    if "label" not in header:
        raise DataError(f"{path}: no 'label' column")
    col = header.index("label")
    labels = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row.strip() or row.startswith("#"):
            continue
        try:
            labels.append(int(row.split(",")[col]) != 0)
        except (ValueError, IndexError) as exc:
            raise DataError(f"{path}:{lineno}: bad label ({exc})") from None
    return np.array(labels, dtype=bool)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj
