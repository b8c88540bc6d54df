import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sobolev_geodesics.convergence_analysis import (
    DegenerateBackground,
    DistanceModel,
    SampleMismatch,
    fit_holder,
    gh_upper_bound,
    pointwise_convergence_report,
    uniform_distance,
)
from sobolev_geodesics.geodesic_engine import DistanceMatrix

QUARTERS = np.array([0, 0.25, 0.5, 0.75, 1.0])


def test_power_models_on_quarter_points():
    D2 = DistanceModel("power", 2).on(QUARTERS)
    D1 = DistanceModel("power", 1).on(QUARTERS)
    assert uniform_distance(D2, D1) == pytest.approx(0.25, abs=1e-15)
    fit = fit_holder(D2, D1, 0.5)
    assert fit.lambda_hat == pytest.approx(1.0, abs=1e-15)
    assert fit.certifies(D2, D1)


def test_closed_form_values():
    assert DistanceModel("taxi")((0, 0), (1, 1)) == 2.0
    assert DistanceModel("power", 3)(0.0, 0.125) == pytest.approx(0.5, abs=1e-15)
    assert DistanceModel("discrete")(0.2, 0.2) == 0.0
    assert DistanceModel("discrete")(0.2, 0.3) == 1.0


def test_invalid_models_rejected():
    with pytest.raises(ValueError):
        DistanceModel("euclid")
    with pytest.raises(ValueError):
        DistanceModel("power", 0)
    with pytest.raises(ValueError):
        DistanceModel("matrix")
    with pytest.raises(ValueError):
        DistanceModel("taxi")((0, 0), (1.5, 0))


def test_matrix_model_is_bound_to_samples():
    D = DistanceModel("power", 2).on(QUARTERS)
    M = DistanceModel("matrix", matrix=D)
    assert M.on(QUARTERS) is D
    assert M(0.25, 1.0) == pytest.approx(D.values[1, 4])
    with pytest.raises(SampleMismatch):
        M.on(QUARTERS[:-1])


def test_sample_mismatch():
    a = DistanceModel("power", 1).on(QUARTERS)
    b = DistanceModel("power", 1).on(QUARTERS + 1e-3 * np.array([0, 1, 0, 0, -1]))
    for fn in (uniform_distance, gh_upper_bound):
        with pytest.raises(SampleMismatch):
            fn(a, b)
    with pytest.raises(SampleMismatch):
        fit_holder(a, b, 1.0)


def test_degenerate_background():
    pts = np.array([0.0, 0.5, 1.0])
    D0 = DistanceMatrix(pts, np.array([[0, 0, 1], [0, 0, 1], [1, 1, 0.0]]))
    with pytest.raises(DegenerateBackground):
        fit_holder(DistanceModel("power", 1).on(pts), D0, 1.0)
    with pytest.raises(ValueError):
        fit_holder(D0, D0, 1.5)


@given(st.integers(1, 8), st.integers(4, 40))
def test_power_against_discrete(j, n):
    """On an N+1 point lattice the sup gap is attained by the closest pair."""
    pts = np.linspace(0, 1, n + 1)
    Dp = DistanceModel("power", j).on(pts)
    Dd = DistanceModel("discrete").on(pts)
    assert uniform_distance(Dp, Dd) == pytest.approx(1 - (1 / n) ** (1 / j), abs=1e-12)


unit_samples = arrays(np.int64, st.integers(3, 12), elements=st.integers(0, 1000), unique=True).map(
    lambda a: a / 1000)


@given(unit_samples, st.integers(1, 6), st.integers(1, 6), st.integers(1, 6))
def test_uniform_distance_is_a_metric(pts, a, b, c):
    A, B, C = (DistanceModel("power", k).on(pts) for k in (a, b, c))
    assert uniform_distance(A, A) == 0
    assert uniform_distance(A, B) == uniform_distance(B, A)
    assert uniform_distance(A, C) <= uniform_distance(A, B) + uniform_distance(B, C) + 1e-15
    assert gh_upper_bound(A, B) <= uniform_distance(A, B)


@given(unit_samples, st.integers(1, 6), st.floats(0.1, 10), st.floats(0.1, 10),
       st.sampled_from([0.25, 0.5, 1.0]))
def test_holder_fit_scale_covariance(pts, j, s, t, alpha):
    Dj = DistanceModel("power", j).on(pts)
    D0 = DistanceModel("power", 1).on(pts)
    base = fit_holder(Dj, D0, alpha)
    scaled = fit_holder(DistanceMatrix(pts, s * Dj.values), DistanceMatrix(pts, t * D0.values), alpha)
    assert scaled.lambda_hat == pytest.approx(base.lambda_hat * s * t**-alpha, rel=1e-12)
    assert scaled.c_hat == pytest.approx(base.c_hat * s / t, rel=1e-12)
    assert base.certifies(Dj, D0)
    # no smaller constant certifies the sample
    tighter = type(base)(alpha, base.lambda_hat * (1 - 1e-9), base.c_hat, base.argmax, base.argmin)
    assert not tighter.certifies(Dj, D0)


@given(unit_samples)
def test_power_sequence_holder_constant_is_one(pts):
    D0 = DistanceModel("power", 1).on(pts)
    for j in (1, 2, 4):
        fit = fit_holder(DistanceModel("power", j).on(pts), D0, 1 / j)
        assert fit.lambda_hat == pytest.approx(1.0, rel=1e-12)


def test_pointwise_report_shapes_and_flags():
    pts = np.linspace(0, 1, 9)
    ref = DistanceModel("discrete").on(pts)
    seq = [DistanceModel("power", j).on(pts) for j in (1, 2, 4, 8)]
    table = pointwise_convergence_report(seq, ref, steps=[1, 2, 4, 8])
    assert table.deviations.shape == (4, 36)
    assert np.all(np.diff(table.sup) < 0)
    assert table.monotone_tail.all()
    assert list(table.rows())[0] == (1, pytest.approx(1 - 1 / 8))
    with pytest.raises(SampleMismatch):
        pointwise_convergence_report(seq, DistanceModel("discrete").on(pts[:-1]))
