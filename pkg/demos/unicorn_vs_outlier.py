"""
Unique events versus outliers
=============================

A logistic map series gets one slowly drifting linear segment. The drifting
values stay inside the range of the chaotic background, so density based
outlier scores barely notice them. The segment is still unique in time: its
state-space neighbors are its own temporal neighbors, which is what the
temporal outlier factor measures.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from unicorns import EmbeddingParams, TofConfig, lof_score, roc_auc, precision_recall_f1
from unicorns.detectors import neighbor_table, run_tof
from unicorns.simulators import gen_logistic_linear

ds = gen_logistic_linear(seed=3)
start, length = ds.spans[0]
print(f"anomaly at samples {start}..{start + length - 1}")

# E=3, tau=1 reconstructs the logistic map attractor
params = EmbeddingParams(dim=3, delay=1)

# longest event we want to call unique: 110 samples
scores, mask = run_tof(ds.series, params, TofConfig(k=4, max_event_len=110))
print(f"TOF threshold {mask.threshold_used:.2f} samples")
print("TOF ROC AUC", round(roc_auc(scores, ds.anomaly_mask), 3))
print("TOF F1     ", round(precision_recall_f1(mask, ds.anomaly_mask).f1, 3))

# LOF on the same neighbor structure
emb, table = neighbor_table(ds.series, params, 28)
lof = lof_score(table, emb.time_index)
print("LOF ROC AUC", round(roc_auc(lof, ds.anomaly_mask), 3))

fig, ax = plt.subplots(3, 1, sharex=True, figsize=(9, 6))
ax[0].plot(ds.series.values, lw=0.5)
ax[0].plot(np.flatnonzero(mask.flags), ds.series.values[mask.flags], ".", ms=2, color="tab:orange")
ax[0].set_ylabel("x")
ax[1].semilogy(scores.time_index, scores.scores, lw=0.5)
ax[1].axhline(mask.threshold_used, color="k", ls=":")
ax[1].set_ylabel("TOF")
ax[2].plot(lof.time_index, lof.scores, lw=0.5)
ax[2].set_ylabel("LOF")
ax[2].set_xlabel("sample")
fig.savefig("unicorn_vs_outlier.png", dpi=120)
