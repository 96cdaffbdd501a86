"""Gradient descent on a topological loss over a point cloud.

Optimizes the positions of a noisy circle sample (plus one outlier) to
maximize the persistence of the dominant H1 bar, comparing the plain
pointwise gradient against the moving-set ("big step") gradient that
spreads each diagram partial over every simplex obstructing the move.
"""
import time

import numpy as np

from topo_opt import DescentConfig, VietorisRips, descend
from topo_opt.experiments import circle_loss, gen_circle

N = 24
X0 = gen_circle(N, seed=3)          # N circle samples + 1 outlier near 0
family = VietorisRips(n_points=len(X0), max_dim=2)
loss, regularizer = circle_loss()   # maximize H1 persistence in a box

for method in ("vanilla", "big_step"):
    cfg = DescentConfig(method=method, steps=15, lr=0.1, decay=0.9)
    t0 = time.perf_counter()
    theta, trace = descend(family, X0, loss, cfg, regularizer)
    elapsed = time.perf_counter() - t0
    values = [rec.loss for rec in trace.records]
    print(f"{method:10s}  start {values[0]:+.4f}  final {values[-1]:+.4f}"
          f"  ({elapsed:.2f}s)")

# The big-step gradient touches many more points per step: each diagram
# partial is copied onto the whole moving set of its birth/death simplex,
# so the outlier gets pulled toward the circle even before it enters the
# dominant bar's own simplices.
from topo_opt import big_step_gradient, vanilla_gradient

_, g_vanilla, _ = vanilla_gradient(family, X0, loss)
_, g_big, _ = big_step_gradient(family, X0, loss, push_scale=0.2)
print(f"vanilla gradient support:  {int((np.abs(g_vanilla).sum(axis=1) > 0).sum())}"
      f" of {len(X0)} points")
print(f"big-step gradient support: {int((np.abs(g_big).sum(axis=1) > 0).sum())}"
      f" of {len(X0)} points")
