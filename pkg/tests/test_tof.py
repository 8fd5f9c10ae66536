import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unicorns import (
    ConstraintError, EmbeddingParams, ParameterError, Series, TofConfig, build_index,
    detect, embed, knn_all, noise_baseline_mean, noise_baseline_var, threshold_from_event_length,
    tof_max, tof_min, tof_score,
)
from unicorns.neighbors import NeighborTable
from unicorns.tof import LOW_IS_ANOMALOUS, ScoreSeries, dilate, event_length_threshold_rule


def scores_for(values, dim=2, delay=1, k=2, dt=1.0, q=2.0):
    emb = embed(Series(np.asarray(values, float), dt=dt), EmbeddingParams(dim, delay))
    table = knn_all(build_index(emb), k)
    return tof_score(table, emb.time_index, dt=dt, q=q)


def brute_tof(values, dim, delay, k, q):
    n_e = len(values) - (dim - 1) * delay
    pts = np.stack([values[j * delay:j * delay + n_e] for j in range(dim)], axis=1)
    out = np.empty(n_e)
    for i in range(n_e):
        d = np.sqrt(((pts - pts[i]) ** 2).sum(axis=1))
        d[i] = np.inf
        order = np.lexsort((np.arange(n_e), d))[:k]
        out[i] = np.mean(np.abs(order - i) ** q) ** (1 / q)
    return out


def test_ramp_interior_scores_are_one():
    s = scores_for(np.arange(50.0))
    np.testing.assert_allclose(s.scores[1:-1], 1.0)
    assert s.orientation == LOW_IS_ANOMALOUS


def test_adjacent_neighbor_gives_dt():
    table = NeighborTable(np.array([[1], [0]]), np.array([[1.0], [1.0]]))
    s = tof_score(table, np.array([0, 1]), dt=0.004)
    np.testing.assert_allclose(s.scores, 0.004)
    assert s.scores[0] == pytest.approx(tof_min(1, 0.004))


def test_q1_lag_five():
    table = NeighborTable(np.array([[5], [0], [0], [0], [0], [0]]), np.ones((6, 1)))
    s = tof_score(table, np.arange(6), dt=0.01, q=1)
    assert s.scores[0] == pytest.approx(0.05)


def test_matches_direct_definition(rng):
    x = rng.normal(size=300)
    for q in (1.0, 2.0, 0.5, 3.0):
        s = scores_for(x, dim=3, delay=2, k=5, q=q)
        np.testing.assert_allclose(s.scores, brute_tof(x, 3, 2, 5, q), rtol=1e-12)


def test_bad_q():
    table = NeighborTable(np.array([[1], [0]]), np.ones((2, 1)))
    with pytest.raises(ParameterError):
        tof_score(table, np.arange(2), q=0)
    with pytest.raises(ParameterError):
        TofConfig(k=2, max_event_len=10, q=-1)


@pytest.mark.parametrize("k,dt,expected", [
    (1, 1.0, 1.0), (2, 1.0, 1.0), (3, 0.5, math.sqrt(2) * 0.5), (4, 1.0, math.sqrt(10 / 4)),
])
def test_tof_min_values(k, dt, expected):
    assert tof_min(k, dt) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("k", range(1, 12))
def test_tof_min_is_best_packing(k):
    # exhaustive search over the k closest distinct nonzero integer lags
    lags = np.arange(-k, k + 1)
    lags = lags[lags != 0]
    best = np.sort(lags ** 2)[:k].sum() / k
    assert tof_min(k) == pytest.approx(math.sqrt(best))


def test_tof_min_error():
    with pytest.raises(ParameterError):
        tof_min(0)


def test_tof_max_values():
    assert tof_max(1, 10) == 10.0
    assert tof_max(2, 10) == pytest.approx(math.sqrt((100 + 81) / 2))
    assert tof_max(2, 10) == pytest.approx(9.513, abs=1e-3)
    assert tof_max(3, 200, 0.1) > tof_max(3, 100, 0.1)
    with pytest.raises(ParameterError):
        tof_max(10, 10)


def test_noise_baseline_mean_values():
    T = 7.0
    assert noise_baseline_mean(T / 2, T) == pytest.approx(T / math.sqrt(12))
    assert noise_baseline_mean(0, T) == pytest.approx(T / math.sqrt(3))
    assert noise_baseline_mean(T / 2, T, q=1) == pytest.approx(T / 4)
    with pytest.raises(ParameterError):
        noise_baseline_mean(T + 1, T)
    with pytest.raises(ParameterError):
        noise_baseline_mean(1.0, T, q=3)


def test_noise_baseline_mean_against_integral():
    # uniform lag on [0, T]: E|t-u|^2 and E|t-u| by quadrature
    T, t = 5.0, 1.3
    u = np.linspace(0, T, 200001)
    m2 = np.trapezoid((t - u) ** 2, u) / T
    m1 = np.trapezoid(np.abs(t - u), u) / T
    assert noise_baseline_mean(t, T) == pytest.approx(math.sqrt(m2), rel=1e-8)
    assert noise_baseline_mean(t, T, q=1) == pytest.approx(m1, rel=1e-6)


def test_noise_baseline_var_values():
    T, k = 3.0, 5
    assert noise_baseline_var(0.0, T, k, "q1") == pytest.approx(T * T / (12 * k))
    assert noise_baseline_var(1.0, T, 4 * k) == pytest.approx(noise_baseline_var(1.0, T, k) / 4)
    with pytest.raises(ParameterError):
        noise_baseline_var(1.0, T, k, "q3")


def test_noise_baseline_var_against_integral():
    T, t, k = 4.0, 0.7, 3
    u = np.linspace(0, T, 400001)
    sq = (t - u) ** 2
    var_sq = np.trapezoid(sq ** 2, u) / T - (np.trapezoid(sq, u) / T) ** 2
    assert noise_baseline_var(t, T, k) == pytest.approx(var_sq / k, rel=1e-6)
    ab = np.abs(t - u)
    var_ab = np.trapezoid(ab ** 2, u) / T - (np.trapezoid(ab, u) / T) ** 2
    assert noise_baseline_var(t, T, k, "q1") == pytest.approx(var_ab / k, rel=1e-6)


@settings(max_examples=60)
@given(T=st.floats(0.1, 1e3), frac=st.floats(0, 1), k=st.integers(1, 50))
def test_baselines_symmetric(T, frac, k):
    t = frac * T
    assert noise_baseline_mean(t, T) == pytest.approx(noise_baseline_mean(T - t, T), rel=1e-9)
    for mode in ("q1", "q2"):
        a, b = noise_baseline_var(t, T, k, mode), noise_baseline_var(T - t, T, k, mode)
        assert a == pytest.approx(b, rel=1e-6, abs=1e-9 * T ** 4)


def test_threshold_values():
    assert threshold_from_event_length(110, 1) == 110
    assert threshold_from_event_length(110, 2) == pytest.approx(math.sqrt((110 ** 2 + 109 ** 2) / 2))
    assert threshold_from_event_length(110, 2) == pytest.approx(109.501, abs=1e-3)
    for dt in (1e-2, 1e-4, 1e-6):
        assert threshold_from_event_length(5.0, 10, dt) == pytest.approx(5.0, rel=2 * 10 * dt / 5)
    with pytest.raises(ConstraintError, match="minimal detectable"):
        threshold_from_event_length(3, 4, 1.0)


def test_config_validation():
    cfg = TofConfig(k=4, max_event_len=0.03)
    assert cfg.padding == 2
    with pytest.raises(ConstraintError):
        cfg.validate(0.01)
    TofConfig(k=3, max_event_len=0.03).validate(0.01)


def test_event_length_rule():
    assert event_length_threshold_rule(2, 20) == 11


def test_detect_examples():
    s = ScoreSeries(np.full(200, 50.0), np.arange(200), 1.0, LOW_IS_ANOMALOUS)
    assert not detect(s, 10.0, 3, 202).flags.any()
    scores = s.scores.copy()
    scores[100] = 1.0
    mask = detect(ScoreSeries(scores, s.time_index, 1.0, LOW_IS_ANOMALOUS), 10.0, 3, 202)
    assert np.flatnonzero(mask.flags).tolist() == list(range(97, 104))
    assert len(mask) == 202 and mask.threshold_used == 10.0


def test_detect_clips_at_edges():
    scores = np.full(10, 9.0)
    scores[[0, 9]] = 0.0
    mask = detect(ScoreSeries(scores, np.arange(10), 1.0, LOW_IS_ANOMALOUS), 1.0, 3, 10)
    assert mask.flags.tolist() == [True] * 4 + [False] * 2 + [True] * 4


@settings(max_examples=50)
@given(st.lists(st.booleans(), min_size=1, max_size=60), st.integers(0, 8))
def test_dilate_matches_definition(flags, w):
    flags = np.array(flags)
    out = dilate(flags, w)
    idx = np.flatnonzero(flags)
    expect = np.array([bool(idx.size) and np.abs(idx - j).min() <= w for j in range(flags.size)])
    np.testing.assert_array_equal(out, expect)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(6, 120), dim=st.integers(1, 4),
       delay=st.integers(1, 3), k=st.integers(1, 8), dt=st.sampled_from([1.0, 0.01, 0.25]))
def test_scores_within_bounds(seed, n, dim, delay, k, dt):
    n_e = n - (dim - 1) * delay
    if n_e < k + 1:
        return
    x = np.random.default_rng(seed).normal(size=n)
    s = scores_for(x, dim, delay, k, dt)
    assert (s.scores >= tof_min(k, dt)).all()
    assert (s.scores <= tof_max(k, n, dt)).all()


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), c=st.floats(1e-3, 1e3))
def test_scale_invariance(seed, c):
    x = np.random.default_rng(seed).normal(size=150)
    a = scores_for(x, 3, 1, 4)
    b = scores_for(x * c, 3, 1, 4)
    np.testing.assert_allclose(a.scores, b.scores)


def test_time_reversal(rng):
    # reversing the series reverses each delay vector's coordinates, a
    # permutation that preserves distances; rows come out in reverse order
    x = rng.normal(size=400)
    a = scores_for(x, 1, 1, 5)
    b = scores_for(x[::-1], 1, 1, 5)
    np.testing.assert_allclose(a.scores, b.scores[::-1])
    a3 = scores_for(x, 3, 2, 5)
    b3 = scores_for(x[::-1], 3, 2, 5)
    np.testing.assert_allclose(a3.scores, b3.scores[::-1])
