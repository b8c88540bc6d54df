"""
Box metrics and their tilings
=============================

The block metric folds the unit square into the top and four walls of a box
of height h: area 1 + 4h, yet the boundary is never more than h + sqrt2
away, and the shortest way between boundary points runs along the boundary.

Tiling 2^j x 2^j shrunken copies hides the walls inside ever smaller cells.
Travel is cheap only along the grid lines, so the distances approach the
taxi metric |dx| + |dy|.
"""

import numpy as np

from sobolev_geodesics import DistanceModel, Grid, MetricModel, distance_matrix, gh_upper_bound, volume
from sobolev_geodesics import references as ref

for h in (2.0, 5.0):
    b = MetricModel.block(h)
    g = Grid.for_model(b, 257)
    print(f"block h={h:g}: volume {volume(b, g):.5f} (1+4h = {1 + 4 * h:g})")

# %%
rng = np.random.default_rng(0)
for j in (2, 3, 4):
    m = MetricModel.tiled(j)  # wall height h_j = j
    g = Grid.for_model(m, 257)
    n = 2**j
    # lattice vertices, where the graph distance is exactly taxi
    verts = rng.integers(0, n + 1, size=(12, 2)) / n
    verts = np.unique(verts, axis=0)
    D = distance_matrix(m, g, verts)
    T = DistanceModel("taxi").on(verts)
    err = np.abs(D.values - T.values).max()
    # arbitrary nodes: the walls cost at most delta_j per endpoint
    pts = np.round(rng.random((30, 2)) * 256) / 256
    gh = gh_upper_bound(distance_matrix(m, g, pts), DistanceModel("taxi").on(pts))
    print(f"tiled j={j}: volume {volume(m, g):.4f}, max |d - taxi| on vertices {err:.1e}, "
          f"GH bound on random nodes {gh:.3f} <= delta_j {ref.tiled_delta(j, j):.3f}")

# Off the vertices the path has to reach a crossing first; the excess over
# taxi is the detour, at most one cell side.
print("lattice path (1/8, 0) -> (1/8, 1/4), n=4:", ref.lattice_path_length((0.125, 0), (0.125, 0.25), 4))
