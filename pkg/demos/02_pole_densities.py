"""
Cone tips against cusp tips
===========================

Both warpings close the cylinder into a sphere-like surface with a pole at
u = pi.  Near a cone tip the area of a small ball scales like r^2, so the
ratio vol(B(r)) / r^2 settles at a positive value (2 for our cone).  A cusp
tip is so thin that the ratio collapses linearly in r.
"""

import numpy as np

from sobolev_geodesics import Grid, MetricModel, WarpingFunction, density_estimate

radii = [0.4, 0.2, 0.1]
for family in ("cone", "cusp"):
    model = MetricModel.warped(getattr(WarpingFunction, family)(), name=family)
    g = Grid.for_model(model, 2049, 64)
    est = density_estimate(model, g, (np.pi, 0.0), radii)
    line = "  ".join(f"r={r:g}: {v:.4f}" for r, v in zip(est.radii, est.ratios))
    print(f"{family:5s} {line}")

# Each finite-j cone is still a cone: near the pole f(u) ~ k (pi - u) with
# k = 1/j + (1 - 1/j) 2/pi, and the ratio tends to pi k.
j = 4
k = 1 / j + (1 - 1 / j) * 2 / np.pi
model = MetricModel.warped(WarpingFunction.cone(j))
est = density_estimate(model, Grid.for_model(model, 2049, 64), (np.pi, 0.0), [0.05])
print(f"cone j={j} at r=0.05: {est.ratios[0]:.4f}  (pi k = {np.pi * k:.4f})")
