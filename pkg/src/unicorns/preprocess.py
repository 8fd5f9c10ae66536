"""Stationarity transforms, band filtering and plain-text series I/O.

Differencing drops the first sample: output index ``j`` corresponds to input
index ``j + 1`` and ``t0`` is advanced by one sampling period. Use
:func:`align_mask` to carry labels along.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .embedding import Series
from .errors import DataError, ParameterError

FORMATS = ("csv_single_column", "csv_t_value")


def log_difference(series: Series) -> Series:
    """``y_t = ln x_t - ln x_{t-1}``; all values must be positive."""
    _check_differencing(series)
    x = series.values
    bad = np.flatnonzero(x <= 0)
    if bad.size:
        raise DataError(f"log_difference needs positive values; x[{bad[0]}] = {x[bad[0]]!r}")
    return Series(np.diff(np.log(x)), series.dt, series.t0 + series.dt)


def first_difference(series: Series) -> Series:
    """``y_t = x_t - x_{t-1}``."""
    _check_differencing(series)
    return Series(np.diff(series.values), series.dt, series.t0 + series.dt)


def _check_differencing(series):
    # the output must itself be a valid series
    if len(series) < 3:
        raise ParameterError(f"differencing needs at least 3 samples, got {len(series)}")


def align_mask(mask, offset: int = 1) -> np.ndarray:
    """Drop the first ``offset`` labels so they line up with a differenced series."""
    return np.asarray(mask, dtype=bool)[offset:]


def bandpass(series: Series, lo_hz: float, hi_hz: float, taper: float = 0.05) -> Series:
    """Zero-phase FFT band-pass filter.

    Bins outside ``[lo_hz, hi_hz]`` are zeroed; inside the band the gain
    rises with a raised cosine over ``taper * lo_hz`` above the lower edge
    and falls over ``taper * hi_hz`` below the upper edge.
    """
    fs = 1.0 / series.dt
    nyquist = fs / 2.0
    if not 0 < lo_hz < hi_hz < nyquist:
        raise ParameterError(f"need 0 < lo < hi < Nyquist ({nyquist:g} Hz), got {lo_hz}, {hi_hz}")
    x = series.values
    freqs = np.fft.rfftfreq(x.size, d=series.dt)
    gain = band_gain(freqs, lo_hz, hi_hz, taper)
    y = np.fft.irfft(np.fft.rfft(x) * gain, n=x.size)
    return Series(y, series.dt, series.t0)


def band_gain(freqs, lo_hz, hi_hz, taper=0.05):
    freqs = np.asarray(freqs, dtype=np.float64)
    gain = ((freqs >= lo_hz) & (freqs <= hi_hz)).astype(np.float64)
    w_lo, w_hi = taper * lo_hz, taper * hi_hz
    if w_lo > 0:
        rise = (freqs >= lo_hz) & (freqs < lo_hz + w_lo)
        gain[rise] = 0.5 - 0.5 * np.cos(np.pi * (freqs[rise] - lo_hz) / w_lo)
    if w_hi > 0:
        fall = (freqs > hi_hz - w_hi) & (freqs <= hi_hz)
        gain[fall] = np.minimum(gain[fall], 0.5 - 0.5 * np.cos(np.pi * (hi_hz - freqs[fall]) / w_hi))
    return gain


def read_sidecar(path) -> dict | None:
    sidecar = Path(path).with_name(Path(path).name + ".json")
    if not sidecar.exists():
        return None
    try:
        return json.loads(sidecar.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{sidecar}: invalid JSON ({exc})") from None


def load_series(path, fmt: str = "csv_single_column", dt: float | None = None) -> Series:
    """Read a series from CSV.

    ``csv_single_column``: one value per line. ``csv_t_value``: time in the
    first column and value in the second; further columns are ignored and
    timestamps must be uniform. A non-numeric first line is treated as a
    header. ``# dt=<seconds>`` comment lines and a ``<path>.json`` sidecar
    with a ``dt`` key are honored; ``dt`` given here overrides both.
    """
    if fmt not in FORMATS:
        raise ParameterError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    header_dt = None
    times, values = [], []
    first_data = True
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition("=")
            if key.strip() == "dt":
                header_dt = _parse_float(val, path, lineno)
            continue
        cells = [c.strip() for c in line.split(",")]
        if first_data:
            first_data = False
            try:
                float(cells[0])
            except ValueError:
                continue  # header row
        if fmt == "csv_t_value":
            if len(cells) < 2:
                raise DataError(f"{path}:{lineno}: expected 't,value'")
            times.append(_parse_float(cells[0], path, lineno))
            values.append(_parse_float(cells[1], path, lineno))
        else:
            values.append(_parse_float(cells[0], path, lineno))
    if len(values) < 2:
        raise DataError(f"{path}: need at least 2 samples, found {len(values)}")
    sidecar = read_sidecar(path) or {}
    t0 = 0.0
    if fmt == "csv_t_value":
        t = np.array(times)
        step = (t[-1] - t[0]) / (t.size - 1)
        if not step > 0:
            raise DataError(f"{path}: timestamps must increase")
        tol = max(1e-9 * step, 16 * np.finfo(float).eps * np.abs(t).max())
        jitter = np.abs(np.diff(t) - step)
        if jitter.max() > tol:
            bad = int(np.argmax(jitter)) + 2
            raise DataError(f"{path}: non-uniform timestamps near data row {bad}")
        t0 = float(t[0])
        detected = float(step)
    else:
        detected = None
    if dt is None:
        dt = detected or header_dt or sidecar.get("dt") or 1.0
    return Series(np.array(values), dt, t0)


def _parse_float(text, path, lineno):
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"{path}:{lineno}: cannot parse {text!r} as a number") from None
    if not np.isfinite(value):
        raise DataError(f"{path}:{lineno}: non-finite value {text!r}")
    return value


def save_series(series: Series, path, labels=None):
    """Write ``t,value[,label]`` CSV with round-trippable floats."""
    header = "t,value" + (",label" if labels is not None else "")
    lines = [header]
    for i, (t, v) in enumerate(zip(series.times, series.values)):
        row = f"{float(t)!r},{float(v)!r}"
        if labels is not None:
            row += f",{int(bool(labels[i]))}"
        lines.append(row)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
