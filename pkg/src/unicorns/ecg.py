"""Synthetic ECG from three delay-coupled van der Pol pacemakers.

The sinoatrial (SA), atrioventricular (AV) and His-Purkinje (HP) pacemakers
drive four FitzHugh-Nagumo muscle responses (P, Ta, QRS, T waves) through
rectified input currents. Tachycardia is produced by raising the SA rate
parameter ``f1`` for a segment.

State layout: ``x1, y1, x2, y2, x3, y3, z1, v1, z2, v2, z3, v3, z4, v4``.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .embedding import Series
from .errors import NumericError, ParameterError
from .simulators import RNG_NAME, LabeledDataset, make_rng

N_STATE = 14


@dataclass(frozen=True)
class EcgParams:
    # pacemakers (SA, AV, HP)
    a: tuple = (40.0, 50.0, 50.0)
    u1: tuple = (0.83, 0.83, 0.83)
    u2: tuple = (-0.83, -0.83, -0.83)
    f: tuple = (22.0, 8.4, 1.5)
    d: tuple = (3.0, 3.0, 3.0)
    e: tuple = (3.5, 5.0, 12.0)
    # None means "equal to the current f1"
    k_sa_av: float | None = None
    k_av_hp: float | None = None
    tau_sa_av: float = 0.0
    tau_av_hp: float = 0.0
    # muscle responses (P, Ta, QRS, T)
    k: tuple = (2e3, 4e2, 1e4, 2e3)
    c: tuple = (0.26, 0.26, 0.12, 0.1)
    b: tuple = (0.0, 0.0, 0.015, 0.0)
    dz: tuple = (0.4, 0.4, 0.09, 0.1)
    h: tuple = (0.004, 0.004, 0.008, 0.008)
    g: tuple = (1.0, 1.0, 1.0, 1.0)
    w1: tuple = (0.13, 0.19, 0.12, 0.22)
    w2: tuple = (1.0, 1.0, 0.11, 0.8)
    # input current gains
    k_at_de: float = 4e-5
    k_at_re: float = 4e-5
    k_vn_de: float = 9e-5
    k_vn_re: float = 6e-5
    z0: float = 0.2
    dt_sim: float = 0.001
    warmup: float = 2.0
    downsample: int = 10

    def delay_steps(self) -> tuple[int, int]:
        steps = []
        for tau in (self.tau_sa_av, self.tau_av_hp):
            m = round(tau / self.dt_sim)
            if tau < 0 or abs(m * self.dt_sim - tau) > 1e-9:
                raise ParameterError(f"delays must be nonnegative multiples of dt_sim, got {tau}")
            steps.append(int(m))
        return tuple(steps)


def input_currents(y1: float, y3: float, p: EcgParams = EcgParams()):
    """Atrial/ventricular depolarization and repolarization currents."""
    i_at_de = p.k_at_de * y1 if y1 > 0 else 0.0
    i_at_re = -p.k_at_re * y1 if y1 <= 0 else 0.0
    i_vn_de = p.k_vn_de * y3 if y3 > 0 else 0.0
    i_vn_re = -p.k_vn_re * y3 if y3 <= 0 else 0.0
    return i_at_de, i_at_re, i_vn_de, i_vn_re


def ecg_rhs(s, f1: float, y1_del: float, y2_del: float, p: EcgParams = EcgParams()):
    """Time derivative of the 14-dimensional state.

    ``y1_del`` and ``y2_del`` are the delayed pacemaker velocities feeding
    the SA->AV and AV->HP couplings.
    """
    x1, y1, x2, y2, x3, y3, z1, v1, z2, v2, z3, v3, z4, v4 = s
    a, u1, u2, f, d, e = p.a, p.u1, p.u2, p.f, p.d, p.e
    k12 = f1 if p.k_sa_av is None else p.k_sa_av
    k23 = f1 if p.k_av_hp is None else p.k_av_hp
    dy1 = -a[0] * y1 * (x1 - u1[0]) * (x1 - u2[0]) - f1 * x1 * (x1 + d[0]) * (x1 + e[0])
    dy2 = (-a[1] * y2 * (x2 - u1[1]) * (x2 - u2[1]) - f[1] * x2 * (x2 + d[1]) * (x2 + e[1])
           + k12 * (y1_del - y2))
    dy3 = (-a[2] * y3 * (x3 - u1[2]) * (x3 - u2[2]) - f[2] * x3 * (x3 + d[2]) * (x3 + e[2])
           + k23 * (y2_del - y3))
    currents = input_currents(y1, y3, p)
    out = [y1, dy1, y2, dy2, y3, dy3]
    k, c, b, dz, h, g, w1, w2 = p.k, p.c, p.b, p.dz, p.h, p.g, p.w1, p.w2
    for j, (z, v) in enumerate(((z1, v1), (z2, v2), (z3, v3), (z4, v4))):
        out.append(k[j] * (-c[j] * z * (z - w1[j]) * (z - w2[j]) - b[j] * v - dz[j] * v * z + currents[j]))
        out.append(k[j] * h[j] * (z - g[j] * v))
    return out


def simulate_waves(duration: float, f1_of_step, p: EcgParams = EcgParams(), state0=None) -> np.ndarray:
    """Integrate with fixed-step RK4 and return the downsampled z1..z4 waves.

    ``f1_of_step(i)`` gives the SA rate parameter for step ``i`` counted
    from the end of the warmup (negative during warmup). The result has
    shape ``(n_out, 4)`` where each row is the mean of ``p.downsample``
    consecutive integration steps.
    """
    dt = p.dt_sim
    n_warm = int(round(p.warmup / dt))
    n_keep = int(round(duration / dt))
    n_out = n_keep // p.downsample
    n_keep = n_out * p.downsample
    m12, m23 = p.delay_steps()
    s = [0.0] * N_STATE if state0 is None else [float(v) for v in state0]
    if len(s) != N_STATE:
        raise ParameterError(f"state0 must have {N_STATE} entries")

    total = n_warm + n_keep
    # delayed couplings read past y1/y2 from these buffers (constant initial history)
    hist1 = np.full(total + 1, s[1])
    hist2 = np.full(total + 1, s[3])
    waves = np.empty((n_keep, 4))

    def delayed(hist, i, m, frac, current):
        if m == 0:
            return current
        pos = i - m + frac
        if pos <= 0:
            return hist[0]
        lo = int(pos)
        w = pos - lo
        return hist[lo] if w == 0.0 else (1 - w) * hist[lo] + w * hist[lo + 1]

    half = 0.5 * dt
    for i in range(total):
        f1 = f1_of_step(i - n_warm)
        k1 = ecg_rhs(s, f1, delayed(hist1, i, m12, 0.0, s[1]), delayed(hist2, i, m23, 0.0, s[3]), p)
        st = [a + half * b for a, b in zip(s, k1)]
        k2 = ecg_rhs(st, f1, delayed(hist1, i, m12, 0.5, st[1]), delayed(hist2, i, m23, 0.5, st[3]), p)
        st = [a + half * b for a, b in zip(s, k2)]
        k3 = ecg_rhs(st, f1, delayed(hist1, i, m12, 0.5, st[1]), delayed(hist2, i, m23, 0.5, st[3]), p)
        st = [a + dt * b for a, b in zip(s, k3)]
        k4 = ecg_rhs(st, f1, delayed(hist1, i, m12, 1.0, st[1]), delayed(hist2, i, m23, 1.0, st[3]), p)
        s = [a + dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
             for a, b1, b2, b3, b4 in zip(s, k1, k2, k3, k4)]
        hist1[i + 1] = s[1]
        hist2[i + 1] = s[3]
        if i >= n_warm:
            waves[i - n_warm] = (s[6], s[8], s[10], s[12])
    if not np.isfinite(waves).all():
        bad = int(np.flatnonzero(~np.isfinite(waves).all(axis=1))[0])
        raise NumericError(f"ECG integration diverged at t = {bad * dt:.3f} s (after warmup)")
    return waves.reshape(n_out, p.downsample, 4).mean(axis=1)


def combine_waves(waves: np.ndarray, z0: float = 0.2) -> np.ndarray:
    """Net ECG ``z0 + z1 - z2 + z3 + z4``."""
    return z0 + waves[:, 0] - waves[:, 1] + waves[:, 2] + waves[:, 3]


def random_initial_state(rng) -> list:
    s = [0.0] * N_STATE
    s[0], s[2], s[4] = rng.uniform(-0.5, 0.5, size=3)
    return s


def gen_ecg(seed, duration: float = 100.0, base_rate=(22.0, 3.0), tachy_rate=(82.0, 3.0),
            tachy_len=(2.0, 20.0), params: EcgParams = EcgParams()) -> LabeledDataset:
    """Simulated ECG with one tachycardic segment.

    The SA rate ``f1`` is drawn from ``N(*base_rate)`` and replaced by a draw
    from ``N(*tachy_rate)`` inside a random segment whose length (seconds) is
    uniform over ``tachy_len``. Output sampling period is
    ``dt_sim * downsample``.
    """
    rng = make_rng(seed)
    dt_out = params.dt_sim * params.downsample
    n_out = int(round(duration / params.dt_sim)) // params.downsample
    lo, hi = (int(round(v / dt_out)) for v in tachy_len)
    if not 1 <= lo <= hi < n_out:
        raise ParameterError(f"tachy_len {tachy_len} does not fit a {duration} s recording")
    f_base = float(rng.normal(*base_rate))
    f_tachy = float(rng.normal(*tachy_rate))
    if f_base <= 0 or f_tachy <= 0:
        raise ParameterError("drawn pacemaker rates must be positive")
    length = int(rng.integers(lo, hi + 1))
    start = int(rng.integers(1, n_out - length + 1))
    a, b = start * params.downsample, (start + length) * params.downsample
    state0 = random_initial_state(rng)

    def f1_of_step(i):
        return f_tachy if a <= i < b else f_base

    waves = simulate_waves(duration, f1_of_step, params, state0)
    mask = np.zeros(n_out, dtype=bool)
    mask[start:start + length] = True
    meta = dict(generator="ecg", seed=seed, rng=RNG_NAME, spans=[[start, length]],
                f1_base=f_base, f1_tachy=f_tachy, dt=dt_out,
                params=dict(duration=duration, base_rate=list(base_rate),
                            tachy_rate=list(tachy_rate), tachy_len=list(tachy_len), **asdict(params)))
    return LabeledDataset(Series(combine_waves(waves, params.z0), dt_out), mask, meta)


def gen_ecg_unique_twave(seed, duration: float = 20.0, gain: float = 2.5,
                         params: EcgParams = EcgParams()) -> LabeledDataset:
    """Regular ECG in which a single T wave has ``gain`` times its usual amplitude.

    A small stand-in for a recording with one strikingly tall T wave. The
    label marks the samples of the boosted T wave.
    """
    rng = make_rng(seed)
    dt_out = params.dt_sim * params.downsample
    state0 = random_initial_state(rng)
    f1 = params.f[0]
    waves = simulate_waves(duration, lambda i: f1, params, state0)
    t_wave = waves[:, 3]
    active = t_wave > 0.05 * t_wave.max()
    edges = np.flatnonzero(np.diff(active.astype(int)))
    starts = edges[::2] + 1 if active[0] == 0 else edges[1::2] + 1
    ends = edges[1::2] + 1 if active[0] == 0 else edges[2::2] + 1
    beats = [(s, e) for s, e in zip(starts, ends)]
    if len(beats) < 3:
        raise ParameterError("recording too short to contain three T waves")
    s, e = beats[int(rng.integers(1, len(beats) - 1))]
    boosted = waves.copy()
    boosted[s:e, 3] *= gain
    mask = np.zeros(len(boosted), dtype=bool)
    mask[s:e] = True
    meta = dict(generator="ecg-unique-twave", seed=seed, rng=RNG_NAME, spans=[[int(s), int(e - s)]],
                gain=gain, dt=dt_out, params=dict(duration=duration))
    return LabeledDataset(Series(combine_waves(boosted, params.z0), dt_out), mask, meta)
