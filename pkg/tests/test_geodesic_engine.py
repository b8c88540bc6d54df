import math

import numpy as np
import pytest
from scipy import integrate
from hypothesis import given, settings
from hypothesis import strategies as st

from sobolev_geodesics import references as ref
from sobolev_geodesics.geodesic_engine import (
    Grid,
    GridTooLarge,
    UnreachableTarget,
    build_graph,
    distance_matrix,
    edge_length,
    edge_lengths,
    geodesic_path,
    multi_source,
    single_source,
    stencil_overshoot,
)
from sobolev_geodesics.metric_models import (
    MetricModel,
    WarpingFunction,
    block_inverse,
    block_region,
    eval_form,
)

FLAT = MetricModel.flat()


def _quadrature_length(model, p, q, n=64):
    x, w = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (x + 1)
    p, q = np.asarray(p, float), np.asarray(q, float)
    pts = p + t[:, None] * (q - p)
    return 0.5 * float(np.sum(w * np.sqrt(eval_form(model, pts, np.broadcast_to(q - p, pts.shape)))))


# ---- grid --------------------------------------------------------------

def test_grid_rejects_small_and_bad_stencil():
    with pytest.raises(ValueError):
        Grid.for_model(FLAT, 4)
    with pytest.raises(ValueError):
        Grid.for_model(FLAT, 16, stencil=12)


def test_pole_rows_collapse():
    m = MetricModel.warped(WarpingFunction.cusp())
    g = Grid.for_model(m, 33, 16)
    ids = g.node_ids()
    assert np.all(ids[0] == g.pole_min_id) and np.all(ids[-1] == g.pole_max_id)
    assert g.n_nodes == 33 * 16 + 2


def test_grid_too_large():
    import sobolev_geodesics.geodesic_engine as ge

    g = Grid.for_model(FLAT, 2100)
    assert g.n_nodes > ge.MAX_NODES
    with pytest.raises(GridTooLarge):
        build_graph(FLAT, g)


# ---- edge lengths ------------------------------------------------------

def test_edge_length_examples():
    assert edge_length(FLAT, (0, 0), (0.1, 0)) == pytest.approx(0.1)
    three = MetricModel.warped(WarpingFunction.constant(3.0))
    assert edge_length(three, (0, 0), (0, 0.05)) == pytest.approx(0.15)
    b = MetricModel.block(2)
    seg = edge_length(b, (0, 0.5), (0.125, 0.5))
    assert seg == pytest.approx(1.0, abs=1e-12)
    assert seg == pytest.approx(_quadrature_length(b, (0, 0.5), (0.125, 0.5)), rel=1e-9)


def test_edge_length_requires_adjacency_on_grid():
    g = Grid.for_model(FLAT, 11)
    assert edge_length(FLAT, (0, 0), (0.1, 0.2), grid=g) == pytest.approx(math.hypot(0.1, 0.2))
    with pytest.raises(ValueError):
        edge_length(FLAT, (0, 0), (0.5, 0.5), grid=g)


def _chart_label(model, X):
    if model.kind == "block":
        return block_region(X[..., 0], X[..., 1])
    l, m, lx, ly = model.to_tile(X[..., 0], X[..., 1])
    return block_region(lx, ly) + 5 * (l * model.tiles + m)


def _straight_length(model, p, q):
    # the metric jumps across chart boundaries: locate them and integrate piecewise
    v = q - p
    t = np.linspace(0, 1, 4001)
    lab = _chart_label(model, p + t[:, None] * v)
    breaks = []
    for i in np.nonzero(lab[1:] != lab[:-1])[0]:
        a, b = t[i], t[i + 1]
        for _ in range(60):
            mid = 0.5 * (a + b)
            if _chart_label(model, (p + mid * v)[None])[0] == lab[i]:
                a = mid
            else:
                b = mid
        breaks.append(a)
    knots = [0.0] + breaks + [1.0]

    def speed(t):
        return math.sqrt(eval_form(model, (p + t * v)[None], v[None])[0])

    return sum(integrate.quad(speed, a, b, epsabs=1e-14, epsrel=1e-12)[0]
               for a, b in zip(knots[:-1], knots[1:]))


@pytest.mark.parametrize("model", [MetricModel.block(2.0), MetricModel.tiled(2, 3.0)])
def test_piecewise_flat_edges_are_chart_chords(model):
    """Edge weights are chart chords: never longer than the straight parameter segment,
    and indistinguishable from it at grid-edge scale."""
    rng = np.random.default_rng(4)
    P = rng.random((100, 2)) * 0.9 + 0.05
    Q = np.clip(P + rng.normal(scale=0.03, size=P.shape), 0, 1)
    for p, q, f in zip(P, Q, edge_lengths(model, P, Q)):
        assert f <= _straight_length(model, p, q) * (1 + 1e-9)
    Q = np.clip(P + rng.normal(scale=1 / 256, size=P.shape), 0, 1)
    for p, q, f in zip(P, Q, edge_lengths(model, P, Q)):
        assert f == pytest.approx(_straight_length(model, p, q), rel=1e-4)


def test_chord_inside_one_chart():
    h = 2.0
    b = MetricModel.block(h)
    p, q = np.array([0.05, 0.4]), np.array([0.15, 0.55])
    reg = block_region(*p)
    assert reg == block_region(*q)
    sp = np.array(block_inverse(reg, *p, h))
    sq = np.array(block_inverse(reg, *q, h))
    assert edge_length(b, p, q) == pytest.approx(np.linalg.norm(sq - sp), rel=1e-12)


def test_smooth_edges_match_fine_quadrature():
    m = MetricModel.warped(WarpingFunction.nonuniform(3))
    rng = np.random.default_rng(5)
    P = np.column_stack([rng.uniform(-0.9, 0.9, 100), rng.uniform(0, 6, 100)])
    Q = P + rng.normal(scale=0.005, size=P.shape)
    fast = edge_lengths(m, P, Q)
    slow = [_quadrature_length(m, p, q) for p, q in zip(P, Q)]
    # 4-point Gauss; edges crossing the bump's curvature jumps lose a few digits
    assert fast == pytest.approx(slow, rel=1e-6)


# ---- single source / paths --------------------------------------------

def test_flat_diagonal_within_stencil_bound():
    g = Grid.for_model(FLAT, 257)
    d = single_source(FLAT, g, (0, 0)).at((1, 1))
    assert math.sqrt(2) <= d <= 1.03 * math.sqrt(2)


def test_cylinder_wraps_around():
    cyl = MetricModel.warped(WarpingFunction.constant(1.0))
    g = Grid.for_model(cyl, 65, 256)
    d = single_source(cyl, g, (0, 0)).at((0, 1.5 * math.pi))
    assert d == pytest.approx(math.pi / 2, rel=1e-12)


def test_nonuniform_p2_q2_local_window():
    j = 2
    m = MetricModel.warped(WarpingFunction.nonuniform(j))
    p, q = ref.nonuniform_points(j)
    L = -p[0]
    g = Grid.for_model(m, 513, domain=(-4 * L, 4 * L, -3.5 * L, 4.5 * L))
    f = single_source(m, g, p)
    assert f.at(q) == pytest.approx(ref.nonuniform_curve_length(j, 0.5), rel=0.03)
    path = geodesic_path(f, q)
    assert max(abs(pt.u) for pt in path.points) <= 1 / (4 * j)


def test_geodesic_path_examples():
    g = Grid.for_model(FLAT, 33)
    f = single_source(FLAT, g, (0, 0))
    path = geodesic_path(f, (1, 0))
    assert path.length == pytest.approx(1.0)
    assert all(pt.v == 0 for pt in path.points)
    same = geodesic_path(f, (0, 0))
    assert len(same.points) == 1 and same.length == 0


@pytest.mark.parametrize("model", [FLAT, MetricModel.block(3.0), MetricModel.warped(WarpingFunction.cone(3))])
def test_path_length_equals_distance(model):
    g = Grid.for_model(model, 65, 64)
    u0, u1, v0, v1 = model.domain
    src = (u0 + 0.3 * (u1 - u0), v0 + 0.2 * (v1 - v0))
    f = single_source(model, g, src)
    rng = np.random.default_rng(6)
    for _ in range(10):
        t = (u0 + rng.random() * (u1 - u0), v0 + rng.random() * (v1 - v0) * 0.99)
        path = geodesic_path(f, t)
        assert np.all(np.diff(path.arclength) >= 0)
        assert path.length == pytest.approx(f.at(t), rel=1e-12)


def test_unreachable_target():
    g = Grid.for_model(FLAT, 9)
    f = single_source(FLAT, g, (0, 0))
    f.node_values[g.node_of((1, 1))] = np.inf
    with pytest.raises(UnreachableTarget):
        geodesic_path(f, (1, 1))


def test_multi_source_is_min_of_single_sources():
    g = Grid.for_model(FLAT, 33)
    srcs = [(0.1, 0.1), (0.9, 0.4)]
    both = multi_source(FLAT, g, srcs)
    sep = np.minimum(*(single_source(FLAT, g, s).values for s in srcs))
    assert np.allclose(both, sep)


# ---- distance matrices -------------------------------------------------

def test_distance_matrix_examples():
    g = Grid.for_model(FLAT, 65)
    D = distance_matrix(FLAT, g, [(0.5, 0.5)])
    assert D.values.shape == (1, 1) and D.values[0, 0] == 0
    corners = [(0, 0), (1, 0), (1, 1), (0, 1)]
    D = distance_matrix(FLAT, g, corners)
    assert D.values[0, 1] == pytest.approx(1.0)
    assert D.values[0, 3] == pytest.approx(1.0)
    assert math.sqrt(2) * (1 - 1e-14) <= D.values[0, 2] <= math.sqrt(2) * stencil_overshoot(16) + 1e-12
    b = MetricModel.block(2)
    D = distance_matrix(b, Grid.for_model(b, 129), [(0, 0), (1, 1)])
    assert D.values[0, 1] == pytest.approx(2.0, rel=0.03)


def test_distance_matrix_order_independent():
    m = MetricModel.warped(WarpingFunction.nonuniform(2))
    g = Grid.for_model(m, 65, 64)
    pts = [(-0.5, 1.0), (0.2, 3.0), (0.9, 5.5), (0.0, 0.0)]
    D1 = distance_matrix(m, g, pts)
    D2 = distance_matrix(m, g, pts[::-1])
    assert np.array_equal(D1.values, D2.values[::-1, ::-1])


AXIOM_MODELS = [
    FLAT,
    MetricModel.block(2.0),
    MetricModel.tiled(2),
    MetricModel.warped(WarpingFunction.nonuniform(3)),
    MetricModel.warped(WarpingFunction.cusp()),
    MetricModel.warped(WarpingFunction.cinch(8, 0.5), periodic_u=True),
]


@settings(max_examples=25)
@given(st.sampled_from(range(len(AXIOM_MODELS))), st.integers(0, 10_000), st.integers(2, 12))
def test_metric_axioms(k, seed, n):
    m = AXIOM_MODELS[k]
    g = Grid.for_model(m, 33, 32)
    rng = np.random.default_rng(seed)
    u0, u1, v0, v1 = m.domain
    pts = np.column_stack([rng.uniform(u0, u1, n), rng.uniform(v0, v1, n)])
    D = distance_matrix(m, g, pts)
    assert D.check_axioms() == (True, True, True)
    assert np.all(D.values >= 0)


@settings(max_examples=15)
@given(st.integers(1, 8), st.integers(0, 10_000))
def test_monotone_under_dominating_form(j, seed):
    big = MetricModel.warped(WarpingFunction.nonuniform(j))
    one = MetricModel.warped(WarpingFunction.constant(1.0))
    rng = np.random.default_rng(seed)
    pts = np.column_stack([rng.uniform(-1, 1, 6), rng.uniform(0, 2 * math.pi, 6)])
    Db = distance_matrix(big, Grid.for_model(big, 65, 64), pts)
    D1 = distance_matrix(one, Grid.for_model(one, 65, 64), pts)
    assert np.all(Db.values >= D1.values - 1e-12)


@pytest.mark.parametrize("model", [
    MetricModel.warped(WarpingFunction.nonuniform(2)),
    MetricModel.warped(WarpingFunction.cone(4)),
])
def test_refinement_differences_shrink(model):
    u0, u1, v0, v1 = model.domain
    pairs = [((u0 + 0.2 * (u1 - u0), 0.5), (u0 + 0.7 * (u1 - u0), 2.0)),
             ((u0 + 0.5 * (u1 - u0), 0.0), (u0 + 0.9 * (u1 - u0), 3.0))]
    for p, q in pairs:
        d = []
        for n in (64, 128, 256):
            # node-aligned samples at every level
            g = Grid.for_model(model, n + 1, n)
            d.append(single_source(model, g, p).at(q))
        diffs = np.abs(np.diff(d))
        assert np.all(np.diff(diffs) <= 1e-12)


def test_pole_distance_independent_of_entry_row():
    """Distances from the pole agree across resolutions, whichever ring node the path uses."""
    m = MetricModel.warped(WarpingFunction.cone())
    vals = []
    for n_v in (48, 64, 96):
        g = Grid.for_model(m, 1025, n_v)
        f = single_source(m, g, (0.0, 0.0))
        ring = f.values[g.snap((1.0, 0))[0]]
        vals.append(ring)
        # every node of one ring is the same distance from the pole
        assert np.ptp(ring) == pytest.approx(0.0, abs=1e-12)
    assert np.ptp([v[0] for v in vals]) <= 1e-12


@pytest.mark.parametrize("stencil,bound", [(16, 1.0275), (8, 1.0824)])
def test_stencil_overshoot(stencil, bound):
    assert stencil_overshoot(stencil) == pytest.approx(bound, abs=1e-4)
    g = Grid.for_model(FLAT, 129, stencil=stencil)
    f = single_source(FLAT, g, (0.5, 0.5))
    P = g.points()
    e = np.hypot(P[..., 0] - 0.5, P[..., 1] - 0.5)
    ok = e > 0
    ratio = f.values[ok] / e[ok]
    assert ratio.min() >= 1 - 1e-12
    assert ratio.max() <= stencil_overshoot(stencil) + 1e-12
