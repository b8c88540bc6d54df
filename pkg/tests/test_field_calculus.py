import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sobolev_geodesics.field_calculus import (
    ScalarField,
    band_limited_field,
    density_estimate,
    field_from_function,
    gradient,
    lp_norm,
    sobolev_w1p_norm,
    tensor_norm_field,
    trace_integral,
    trace_ratio_test,
    volume,
)
from sobolev_geodesics.geodesic_engine import (
    Grid,
    edge_lengths,
    geodesic_path,
    single_source,
)
from sobolev_geodesics.metric_models import MetricModel, WarpingFunction

FLAT = MetricModel.flat()
CYL = MetricModel.warped(WarpingFunction.constant(1.0), name="cylinder")


def bump(j):
    return MetricModel.warped(WarpingFunction.nonuniform(j), name=f"bump{j}")


# ---- volume --------------------------------------------------------------

def test_volume_examples():
    assert volume(FLAT, Grid.for_model(FLAT, 33)) == pytest.approx(1.0, abs=1e-10)
    assert volume(CYL, Grid.for_model(CYL, 65)) == pytest.approx(4 * math.pi, rel=1e-12)
    three = MetricModel.warped(WarpingFunction.constant(3.0))
    assert volume(three, Grid.for_model(three, 65)) == pytest.approx(12 * math.pi, rel=1e-12)
    b = MetricModel.block(2.0)
    assert volume(b, Grid.for_model(b, 129)) == pytest.approx(9.0, rel=0.01)


@pytest.mark.parametrize("h", [1.5, 2.0, 5.0])
@pytest.mark.parametrize("j", [1, 2])
def test_tiled_volume_is_independent_of_tiling(j, h):
    m = MetricModel.tiled(j, h)
    assert volume(m, Grid.for_model(m, 257)) == pytest.approx(1 + 4 * h, rel=0.01)


@pytest.mark.parametrize("model", [FLAT, MetricModel.block(2.0), bump(4)], ids=["flat", "block", "bump"])
def test_volume_is_additive_over_a_partition(model):
    u0, u1, v0, v1 = model.domain
    um, vm = 0.5 * (u0 + u1), 0.5 * (v0 + v1)
    whole = volume(model, Grid(model.domain, 129, 129))
    parts = 0.0
    for a, b in ((u0, um), (um, u1)):
        for c, d in ((v0, vm), (vm, v1)):
            parts += volume(model, Grid.for_model(model, 65, 65, domain=(a, b, c, d)))
    assert parts == pytest.approx(whole, rel=1e-10)


# ---- tensor norms -------------------------------------------------------

def test_tensor_norm_examples():
    g = Grid.for_model(CYL, 33)
    assert np.allclose(tensor_norm_field(CYL, CYL, g).values, math.sqrt(2))
    # plateau height 3 for j = 4, eta = 1/2
    m = bump(4)
    vals = tensor_norm_field(m, CYL, g)
    P = g.points()
    centre = np.abs(P[..., 0]) <= 1 / 8
    outside = np.abs(P[..., 0]) >= 1 / 4
    assert np.allclose(vals.values[centre], math.sqrt(82))
    assert np.allclose(vals.values[outside], math.sqrt(2))


def test_tensor_norm_marks_poles():
    m = MetricModel.warped(WarpingFunction.cone(4))
    g = Grid.for_model(m, 33)
    vals = tensor_norm_field(m, m, g).values
    assert np.isnan(vals[0]).all() and np.isnan(vals[-1]).all()
    assert np.allclose(vals[1:-1], math.sqrt(2))


# ---- Sobolev norms ------------------------------------------------------

@given(st.integers(-500, 500).map(lambda k: k / 100), st.sampled_from([1.0, 1.5, 2.0, 4.0]))
def test_constant_field_norm(c, p):
    g = Grid.for_model(FLAT, 17)
    f = ScalarField(np.full(g.shape, c), g)
    assert sobolev_w1p_norm(f, FLAT, p) == pytest.approx(abs(c), rel=1e-12)
    assert lp_norm(f, FLAT, p) == pytest.approx(abs(c), rel=1e-12)


def test_linear_field_norm():
    g = Grid.for_model(FLAT, 257)
    f = field_from_function(lambda x, y: x, g)
    assert sobolev_w1p_norm(f, FLAT, 2) == pytest.approx(math.sqrt(4 / 3), rel=1e-5)
    # p = 1 splits into the two integrals
    assert sobolev_w1p_norm(f, FLAT, 1) == pytest.approx(lp_norm(f, FLAT, 1) + 1.0, rel=1e-12)
    with pytest.raises(ValueError):
        sobolev_w1p_norm(f, FLAT, 0.5)


def test_gradient_is_second_order():
    errs = []
    for n in (33, 65, 129):
        g = Grid.for_model(FLAT, n)
        f = field_from_function(lambda x, y: np.sin(2 * np.pi * x) * np.cos(3 * y), g)
        gx, gy = gradient(f)
        P = g.points()
        ex = 2 * np.pi * np.cos(2 * np.pi * P[..., 0]) * np.cos(3 * P[..., 1])
        ey = -3 * np.sin(2 * np.pi * P[..., 0]) * np.sin(3 * P[..., 1])
        errs.append(max(np.abs(gx - ex).max(), np.abs(gy - ey).max()))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.8)


def test_gradient_wraps_periodic_axis():
    g = Grid.for_model(CYL, 65, 128)
    f = field_from_function(lambda u, v: np.sin(v), g)
    _, gv = gradient(f)
    assert np.allclose(gv, np.cos(g.points()[..., 1]), atol=1e-3)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_band_limited_fields_are_reproducible(seed):
    g = Grid.for_model(FLAT, 33)
    a, b = band_limited_field(g, seed), band_limited_field(g, seed)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, band_limited_field(g, seed + 1).values)


# ---- traces -------------------------------------------------------------

def _flat_path(a, b, n=65):
    g = Grid.for_model(FLAT, n)
    return g, geodesic_path(single_source(FLAT, g, a), b)


def test_trace_examples():
    g, path = _flat_path((0.25, 0.5), (1.0, 0.5))
    L = path.length
    assert L == pytest.approx(0.75)
    one = ScalarField(np.ones(g.shape), g)
    assert trace_integral(one, path, 1) == pytest.approx(L)
    assert trace_integral(one, path, 2) == pytest.approx(math.sqrt(L))
    g, path = _flat_path((0.0, 0.0), (1.0, 0.0))
    x = field_from_function(lambda x, y: x, g)
    assert trace_integral(x, path, 1) == pytest.approx(0.5, rel=1e-12)
    with pytest.raises(ValueError):
        trace_integral(x, path, 0.5)


def test_constant_field_ratio_is_longest_path():
    g = Grid.for_model(FLAT, 33)
    one = ScalarField(np.ones(g.shape), g, tag="one")
    res = trace_ratio_test(FLAT, g, p=1, n_paths=10, seed=3, fields=[one])
    assert res.max_ratio == pytest.approx(res.longest_path, rel=1e-12)
    assert res.table[0][0] == "one"


def test_trace_ratio_needs_smooth_background():
    b = MetricModel.block(2)
    with pytest.raises(ValueError):
        trace_ratio_test(b, Grid.for_model(b, 33), n_fields=1, n_paths=1)


@pytest.mark.parametrize("p", [1.0, 2.0, 4.0])
@pytest.mark.parametrize("j", [2, 4, 8])
def test_length_bounded_by_tensor_norm_trace(j, p):
    """len_j(path) <= (int |g_j|^{p/2} ds_0)^{1/p} L_0^{(p-1)/p} along any background path."""
    m = bump(j)
    g = Grid.for_model(CYL, 257, 256)
    path = geodesic_path(single_source(CYL, g, (-0.6, 1.0)), (0.5, 1.4))
    pts = path.as_array()
    len_j = float(edge_lengths(m, pts[:-1], pts[1:]).sum())
    root = tensor_norm_field(m, CYL, g)
    root.values = np.sqrt(root.values)
    bound = trace_integral(root, path, p) * path.length ** ((p - 1) / p)
    assert len_j <= bound * (1 + 1e-3)
    assert len_j > path.length


@pytest.mark.parametrize("j", [2, 4, 8, 16])
def test_volume_bounded_by_tensor_norm(j):
    """vol_j <= 2^{-1/2} vol_0^{1/2} || |g_j|_{g_0} ||_{L^2}."""
    m = bump(j)
    g = Grid.for_model(CYL, 513, 64)
    vj = volume(m, g)
    v0 = volume(CYL, g)
    norm = lp_norm(tensor_norm_field(m, CYL, g), CYL, 2)
    assert vj <= norm * math.sqrt(v0 / 2) * (1 + 1e-3)
    assert vj <= 16 * math.pi


# ---- densities ----------------------------------------------------------

def test_flat_density_is_close_to_pi():
    g = Grid.for_model(FLAT, 257)
    est = density_estimate(FLAT, g, (0.5, 0.5), [0.05, 0.1])
    assert list(est.radii) == [0.1, 0.05]
    assert np.all(np.abs(est.ratios - math.pi) <= 0.05 * math.pi)


def test_density_rejects_bad_radii():
    g = Grid.for_model(FLAT, 33)
    with pytest.raises(ValueError):
        density_estimate(FLAT, g, (0.5, 0.5), [0.0])
    with pytest.raises(ValueError):
        density_estimate(FLAT, g, (0.5, 0.5), [5.0])


def test_cone_pole_density_below_flat():
    m = MetricModel.warped(WarpingFunction.cone())
    g = Grid.for_model(m, 513, 64)
    est = density_estimate(m, g, (0.0, 0.0), [0.4, 0.2])
    assert np.all(est.ratios < math.pi)
    assert np.all(est.ratios > 0)
