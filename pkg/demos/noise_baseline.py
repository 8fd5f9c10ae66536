"""
TOF on white noise
==================

For i.i.d. noise the neighbors of a point are spread uniformly in time, so
the expected squared TOF is a parabola in t: lowest in the middle of the
recording, highest at its edges. Its spread shrinks like 1/k.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from unicorns import EmbeddingParams, Series, build_index, embed, knn_all, noise_baseline_mean, noise_baseline_var, tof_score

rng = np.random.default_rng(1)
n, k, runs = 1000, 4, 100
sq = []
for _ in range(runs):
    emb = embed(Series(rng.normal(size=n)), EmbeddingParams(3, 1))
    sq.append(tof_score(knn_all(build_index(emb), k), emb.time_index).scores ** 2)
sq = np.array(sq)
t = np.arange(sq.shape[1], dtype=float)
T = float(sq.shape[1])

rms = np.sqrt(sq.mean(axis=0))
theory = noise_baseline_mean(t, T)
print("rms TOF / theory, middle 80%:",
      np.round(np.percentile((rms / theory)[int(0.1 * T):int(0.9 * T)], [5, 50, 95]), 3))

fig, ax = plt.subplots(2, 1, sharex=True, figsize=(8, 5))
ax[0].plot(t, rms, lw=0.5, label="simulated")
ax[0].plot(t, theory, "k", label="uniform-lag baseline")
ax[0].set_ylabel("rms TOF")
ax[0].legend()
ax[1].plot(t, sq.var(axis=0), lw=0.5)
ax[1].plot(t, noise_baseline_var(t, T, k), "k")
ax[1].set_ylabel("var TOF$^2$")
ax[1].set_xlabel("t (samples)")
fig.savefig("noise_baseline.png", dpi=120)
