"""
Distances on a warped cylinder with a tall, narrow bump
=======================================================

The cylinder [-1, 1] x S^1 carries du^2 + f(u)^2 dv^2.  With f = 1 it is flat.
Raising a bump of height j**eta + 1 on |u| <= 1/(2j) stretches the circle
direction near u = 0, so two points straddling the plateau drift apart while
everything away from the bump stays put.
"""

import math

import numpy as np

from sobolev_geodesics import Grid, MetricModel, WarpingFunction, single_source, stencil_overshoot
from sobolev_geodesics import references as ref

flat = MetricModel.warped(WarpingFunction.constant(1.0), name="f=1")

# Graph distances overestimate the true ones by at most this factor
print(f"16-neighbour stencil overshoot: {stencil_overshoot(16):.5f}")
print(f" 8-neighbour stencil overshoot: {stencil_overshoot(8):.5f}")

# %%
# The plateau pair sits inside a tiny window, so we grid the window only.
for j in (2, 4, 8):
    bump = MetricModel.warped(WarpingFunction.nonuniform(j), name=f"bump j={j}")
    p, q = ref.nonuniform_points(j)
    L = 1 / (8 * j**2)
    window = (-4 * L, 4 * L, -3.5 * L, 4.5 * L)
    g = Grid.for_model(bump, 513, domain=window)
    d_j = single_source(bump, g, p).at(q)
    d_0 = math.dist(p, q)
    print(f"j={j}: d_j={d_j:.6g}  closed form {ref.nonuniform_curve_length(j, 0.5):.6g}  "
          f"ratio d_j/d_0={d_j / d_0:.4f}")

# %%
# Whole-cylinder distances from one source: the bump only ever lengthens paths.
g = Grid.for_model(flat, 257, 256)
src = (-0.8, 0.0)
d0 = single_source(flat, g, src).values
for j in (2, 4):
    bump = MetricModel.warped(WarpingFunction.nonuniform(j))
    dj = single_source(bump, g, src).values
    print(f"j={j}: min(d_j - d_0) = {np.min(dj - d0):.2e}, max = {np.max(dj - d0):.4f}")
