"""Time-delay embedding and helpers for choosing delay and dimension."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, ParameterError


@dataclass(frozen=True)
class Series:
    """Uniformly sampled scalar time series.

    ``dt`` is the sampling period in seconds and ``t0`` the time of the
    first sample.
    """

    values: np.ndarray
    dt: float = 1.0
    t0: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if values.size < 2:
            raise ParameterError(f"series needs at least 2 samples, got {values.size}")
        if not np.isfinite(values).all():
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise ParameterError(f"non-finite value at index {bad}")
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise ParameterError(f"dt must be positive, got {self.dt}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "t0", float(self.t0))

    def __len__(self):
        return self.values.size

    @property
    def duration(self) -> float:
        """Total length ``N * dt``."""
        return len(self) * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self))


@dataclass(frozen=True)
class EmbeddingParams:
    dim: int = 3
    delay: int = 1

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ParameterError(f"embedding dimension must be a positive integer, got {self.dim}")
        if int(self.delay) != self.delay or self.delay < 1:
            raise ParameterError(f"embedding delay must be a positive integer, got {self.delay}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "delay", int(self.delay))

    @property
    def window(self) -> int:
        """Number of samples spanned by one state vector minus one."""
        return (self.dim - 1) * self.delay


@dataclass(frozen=True)
class EmbeddedSeries:
    """State vectors; row ``i`` is the state starting at sample ``time_index[i]``."""

    points: np.ndarray
    time_index: np.ndarray
    dt: float = 1.0
    params: EmbeddingParams | None = None

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def embed(series: Series, params: EmbeddingParams) -> EmbeddedSeries:
    """Forward delay embedding ``X(t) = [x(t), x(t+tau), ..., x(t+(E-1)tau)]``.

    Returns ``N - (E-1)*tau`` rows; row ``i`` has ``time_index`` ``i``.
    """
    n = len(series)
    n_rows = n - params.window
    if n_rows < 1:
        raise ParameterError(
            f"series of length {n} is too short for E={params.dim}, tau={params.delay}; "
            f"need at least {params.window + 1} samples"
        )
    x = series.values
    points = np.empty((n_rows, params.dim))
    for j in range(params.dim):
        start = j * params.delay
        points[:, j] = x[start:start + n_rows]
    return EmbeddedSeries(points, np.arange(n_rows), series.dt, params)


def autocorrelation(series: Series, max_lag: int) -> np.ndarray:
    """Normalized autocorrelation of the mean-removed series for lags 0..max_lag."""
    x = series.values
    n = x.size
    if max_lag < 0 or max_lag >= n:
        raise ParameterError(f"max_lag must be in [0, {n - 1}], got {max_lag}")
    x = x - x.mean()
    c0 = np.dot(x, x)
    if c0 == 0.0:
        raise DegenerateInputError("autocorrelation of a constant series is undefined")
    acf = np.empty(max_lag + 1)
    for lag in range(max_lag + 1):
        acf[lag] = np.dot(x[:n - lag], x[lag:]) / c0
    acf[0] = 1.0
    return acf


def first_zero_or_min_delay(acf) -> int:
    """Suggested delay: first zero crossing or first local minimum of ``acf``.

    Whichever comes first wins. For a sign change between lags ``l-1`` and
    ``l`` the later lag ``l`` is reported.
    """
    acf = np.asarray(acf, dtype=np.float64)
    for lag in range(1, acf.size):
        if acf[lag] <= 0.0 < acf[lag - 1] or acf[lag] >= 0.0 > acf[lag - 1]:
            return lag
        if lag + 1 < acf.size and acf[lag] < acf[lag - 1] and acf[lag] <= acf[lag + 1]:
            return lag
    raise DegenerateInputError(
        "autocorrelation has neither a zero crossing nor a local minimum within max_lag"
    )


def intrinsic_dimension(embedded: EmbeddedSeries, k: int = 10) -> float:
    """Two-scale nearest-neighbor estimate of intrinsic dimension.

    For each point, ``ln 2 / ln(R_2k / R_k)`` where ``R_k`` is the distance to
    its k-th neighbor; the estimate is the average over points. Points with a
    zero ``R_k`` (duplicates) are skipped.
    """
    from scipy.spatial import cKDTree

    n = len(embedded)
    if k < 2:
        raise ParameterError(f"k must be at least 2, got {k}")
    if n <= 2 * k:
        raise ParameterError(f"need more than 2k={2 * k} points, got {n}")
    dist, _ = cKDTree(embedded.points).query(embedded.points, k=[k + 1, 2 * k + 1])
    r_k, r_2k = dist[:, 0], dist[:, 1]
    ok = (r_k > 0) & (r_2k > r_k)
    if not ok.any():
        raise DegenerateInputError("all points have degenerate neighbor distances")
    return float(np.mean(np.log(2.0) / np.log(r_2k[ok] / r_k[ok])))
