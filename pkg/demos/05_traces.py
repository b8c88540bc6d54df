"""
Traces of Sobolev functions along geodesics
===========================================

For smooth fields on the flat square, the L^1 norm along any geodesic is
controlled by the W^{1,1} norm over the square.  We sample random
band-limited fields and random geodesics and watch the worst ratio stay put
under grid refinement.

A field with a logarithmic singularity along a segment behaves differently:
its L^2 norm is finite, but the trace along a parallel column of nodes keeps
growing like |log spacing| as the column approaches the segment.
"""

from sobolev_geodesics import Grid, MetricModel, trace_ratio_test
from sobolev_geodesics.experiments import log_distance_trace

flat = MetricModel.flat()
for cells in (32, 64):
    g = Grid.for_model(flat, cells + 1)
    res = trace_ratio_test(flat, g, p=1.0, n_fields=8, n_paths=40, seed=0)
    print(f"{cells}^2 cells: worst trace / W^(1,1) ratio {res.max_ratio:.5f}")

# %%
prev = None
for n in (64, 128, 256, 512):
    s = log_distance_trace(n)
    growth = "" if prev is None else f"  growth x{s.trace / prev:.3f}"
    print(f"n={n:3d} offset={s.offset:.5f} trace={s.trace:.4f} L2={s.lq_norm:.4f}{growth}")
    prev = s.trace
