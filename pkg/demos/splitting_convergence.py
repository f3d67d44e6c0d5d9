# Self-convergence of the splitting in the number of intervals.
#
# The coarse path is refined with Brownian bridges, so every run below is
# driven by the same logical noise.  Gaps between consecutive resolutions
# should halve with each doubling.

import numpy as np

from thinfilm import SplittingConfig, TorusGrid, observed_order, sample_path, splitting_self_convergence

grid = TorusGrid(1.0, 128)
u0 = grid.sample(lambda x: 1.0 + 0.3 * np.sin(2 * np.pi * x))
T = 1e-3
cfg = SplittingConfig(T, 16, epsilon=0.01)

gaps = splitting_self_convergence(u0, cfg, sample_path(5, T, 16), doublings=3)
for n, gap in gaps:
    print(f"intervals {n:4d} vs {2 * n:4d}: max gap {gap:.3e}")
print(f"observed order {observed_order(gaps, T):.3f}")
