import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unicorns import DataError, ParameterError, Series
from unicorns.preprocess import (
    align_mask, band_gain, bandpass, first_difference, load_series, log_difference, save_series,
)


def rms(x):
    return float(np.sqrt(np.mean(np.square(x))))


def test_log_difference_examples():
    y = log_difference(Series([1.0, np.e, np.e ** 2], dt=0.5, t0=2.0))
    np.testing.assert_allclose(y.values, [1.0, 1.0])
    assert y.dt == 0.5 and y.t0 == 2.5
    np.testing.assert_array_equal(log_difference(Series(np.full(10, 3.3))).values, 0.0)


def test_log_difference_of_multiplicative_walk(rng):
    w = rng.normal(0.001, 0.01, size=500)
    y = log_difference(Series(np.cumprod(1 + w)))
    np.testing.assert_allclose(y.values, np.log1p(w[1:]), rtol=1e-8, atol=1e-13)


def test_log_difference_rejects_nonpositive():
    with pytest.raises(DataError, match=r"x\[2\]"):
        log_difference(Series([1.0, 2.0, 0.0, 3.0]))


@settings(max_examples=50)
@given(st.lists(st.floats(-0.5, 0.5), min_size=2, max_size=100), st.floats(-3, 3))
def test_log_difference_round_trip(steps, start):
    z = start + np.concatenate(([0.0], np.cumsum(steps)))
    y = log_difference(Series(np.exp(z)))
    np.testing.assert_allclose(y.values, np.diff(z), rtol=1e-12, atol=1e-12)


def test_first_difference_examples():
    np.testing.assert_array_equal(first_difference(Series([1.0, 3.0, 6.0])).values, [2.0, 3.0])
    np.testing.assert_array_equal(first_difference(Series(np.full(5, 2.0))).values, 0.0)


@settings(max_examples=50)
@given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=100))
def test_first_difference_telescopes(values):
    x = np.array(values)
    y = first_difference(Series(x))
    np.testing.assert_allclose(x[0] + np.concatenate(([0.0], np.cumsum(y.values))), x, atol=1e-9)


def test_differencing_needs_three_samples():
    with pytest.raises(ParameterError):
        first_difference(Series([1.0, 2.0]))
    with pytest.raises(ParameterError):
        log_difference(Series([1.0, 2.0]))


def test_align_mask():
    mask = np.array([0, 1, 1, 0], bool)
    np.testing.assert_array_equal(align_mask(mask), [True, True, False])


FS = 4096.0


def tone(freq, n=4096):
    t = np.arange(n) / FS
    return Series(np.sin(2 * np.pi * freq * t), dt=1 / FS)


def test_bandpass_passband():
    x = tone(100.0)
    y = bandpass(x, 50, 300)
    assert rms(y.values - x.values) < 0.01 * rms(x.values)
    assert len(y) == len(x) and y.dt == x.dt


def test_bandpass_stopband():
    x = tone(10.0)
    assert rms(bandpass(x, 50, 300).values) < 0.01 * rms(x.values)


def test_bandpass_zero_phase():
    # a band-limited pulse stays centered
    n = 4096
    t = (np.arange(n) - n // 2) / FS
    x = Series(np.exp(-(t / 0.005) ** 2) * np.cos(2 * np.pi * 150 * t), dt=1 / FS)
    y = bandpass(x, 50, 300)
    assert np.argmax(np.abs(y.values)) == np.argmax(np.abs(x.values))


def test_bandpass_zero_and_errors():
    z = Series(np.zeros(256), dt=1 / FS)
    np.testing.assert_array_equal(bandpass(z, 50, 300).values, 0.0)
    for lo, hi in [(0, 100), (300, 50), (50, 3000)]:
        with pytest.raises(ParameterError):
            bandpass(z, lo, hi)


def test_band_gain_shape():
    f = np.array([0, 49, 50, 51, 100, 290, 300, 301])
    g = band_gain(f, 50, 300)
    assert g[0] == g[1] == g[-1] == 0
    assert g[4] == 1
    assert 0 <= g[3] < 1 and g[2] == 0
    assert ((g >= 0) & (g <= 1)).all()


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), a=st.floats(-10, 10), b=st.floats(-10, 10))
def test_bandpass_linear(seed, a, b):
    r = np.random.default_rng(seed)
    x, y = r.normal(size=512), r.normal(size=512)
    f = lambda v: bandpass(Series(v, dt=1 / FS), 50, 300).values
    np.testing.assert_allclose(f(a * x + b * y), a * f(x) + b * f(y), atol=1e-9)


def test_load_single_column(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("1.5\n2.5\n-3\n")
    s = load_series(p)
    np.testing.assert_array_equal(s.values, [1.5, 2.5, -3.0])
    assert s.dt == 1.0
    assert load_series(p, dt=0.1).dt == 0.1


def test_load_single_column_header_dt(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("# dt=0.02\nvalue\n1\n2\n3\n")
    s = load_series(p)
    assert s.dt == 0.02 and len(s) == 3


def test_load_t_value_detects_dt(tmp_path):
    p = tmp_path / "tv.csv"
    t = 5 + 0.004 * np.arange(50)
    p.write_text("t,value\n" + "".join(f"{float(a)!r},{float(np.sin(a))!r}\n" for a in t))
    s = load_series(p, "csv_t_value")
    assert s.dt == pytest.approx(0.004, rel=1e-9)
    assert s.t0 == 5.0 and len(s) == 50


def test_load_t_value_rejects_jitter(tmp_path):
    p = tmp_path / "tv.csv"
    t = 0.004 * np.arange(50)
    t[20] += 1e-6
    p.write_text("".join(f"{float(a)!r},1.0\n" for a in t))
    with pytest.raises(DataError, match="non-uniform"):
        load_series(p, "csv_t_value")


def test_load_parse_error_line_number(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("1\n2\nabc\n4\n")
    with pytest.raises(DataError, match=":3:"):
        load_series(p)


def test_load_errors(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("1\n")
    with pytest.raises(DataError):
        load_series(p)
    with pytest.raises(DataError):
        load_series(tmp_path / "missing.csv")
    with pytest.raises(ParameterError):
        load_series(p, "xml")


def test_save_load_round_trip(tmp_path, rng):
    s = Series(rng.normal(size=100), dt=0.125, t0=1.0)
    save_series(s, tmp_path / "r.csv", labels=rng.random(100) < 0.1)
    back = load_series(tmp_path / "r.csv", "csv_t_value")
    np.testing.assert_array_equal(back.values, s.values)
    assert back.dt == 0.125 and back.t0 == 1.0
