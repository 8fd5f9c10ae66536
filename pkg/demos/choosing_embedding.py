"""
Picking the embedding
=====================

The delay comes from the autocorrelation (first zero crossing, or first
minimum), the dimension from where the nearest-neighbor intrinsic dimension
stops growing.
"""

import numpy as np

from unicorns import EmbeddingParams, Series, autocorrelation, embed, first_zero_or_min_delay, intrinsic_dimension

# a quasi-periodic signal with noise
rng = np.random.default_rng(0)
t = np.arange(4000) * 0.01
x = np.sin(2 * np.pi * 0.7 * t) + 0.5 * np.sin(2 * np.pi * 1.9 * t) + 0.05 * rng.normal(size=t.size)
series = Series(x, dt=0.01)

acf = autocorrelation(series, max_lag=200)
tau = first_zero_or_min_delay(acf)
print(f"delay: {tau} samples = {tau * series.dt:.2f} s")

# the attractor is a 2-torus: the estimate reaches about 2 by E=3 and
# stops growing, so E=3 is enough
for dim in range(1, 7):
    d = intrinsic_dimension(embed(series, EmbeddingParams(dim, tau)), k=10)
    print(f"E={dim}: intrinsic dimension {d:.2f}")
