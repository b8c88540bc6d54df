"""Integrals of scalar fields and metric-tensor norms over grid-discretised models.

Node-based fields use tensor trapezoid weights (uniform weights on periodic
axes) multiplied by the model's area element.  Volumes use the cell-midpoint
rule; for piecewise-flat models the cells cut by a chart boundary are split
along it before the midpoint rule is applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import shapely
import shapely.affinity
from shapely.geometry import Polygon, box

from .geodesic_engine import (
    GeodesicPath,
    Grid,
    build_graph,
    geodesic_path,
    single_source,
)
from .metric_models import MetricModel, block_inverse_jacobian, block_region


@dataclass
class ScalarField:
    values: np.ndarray
    grid: Grid
    tag: str = "analytic"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError("field shape does not match its grid")

    def at_points(self, pts):
        idx = [self.grid.snap(p) for p in pts]
        return np.array([self.values[i, k] for i, k in idx])


def field_from_function(fn, grid: Grid, tag="analytic") -> ScalarField:
    P = grid.points()
    return ScalarField(fn(P[..., 0], P[..., 1]), grid, tag)


# --------------------------------------------------------------------------
# quadrature weights
# --------------------------------------------------------------------------

def _axis_weights(n, h, periodic):
    w = np.full(n, h)
    if not periodic:
        w[0] = w[-1] = 0.5 * h
    return w


def node_weights(grid: Grid) -> np.ndarray:
    """Parameter-space trapezoid weights of every node."""
    return np.outer(
        _axis_weights(grid.n_u, grid.du, grid.periodic_u),
        _axis_weights(grid.n_v, grid.dv, grid.periodic_v),
    )


def node_measure(model: MetricModel, grid: Grid) -> np.ndarray:
    """Riemannian measure attached to every node (pole rows get their cap)."""
    P = grid.points()
    w = node_weights(grid) * _sqrt_det_safe(model, P[..., 0], P[..., 1])
    if model.kind == "warped":
        # a collapsed pole row carries the cap of half a cell
        caps = []
        if grid.pole_u_min:
            caps.append((0, grid.domain[0] + 0.25 * grid.du))
        if grid.pole_u_max:
            caps.append((-1, grid.domain[1] - 0.25 * grid.du))
        for row, r in caps:
            w[row, :] = 0.0
            w[row, 0] = (grid.domain[3] - grid.domain[2]) * 0.5 * grid.du * float(model.warp(r))
    return w


def _sqrt_det_safe(model, U, V):
    out = model.sqrt_det(U, V)
    return np.where(np.isfinite(out), out, 0.0)


# --------------------------------------------------------------------------
# volume
# --------------------------------------------------------------------------

def _cell_centres(grid: Grid):
    uc = grid.u if grid.periodic_u else grid.u[:-1]
    vc = grid.v if grid.periodic_v else grid.v[:-1]
    return uc + 0.5 * grid.du, vc + 0.5 * grid.dv


def _chart_polygons(model: MetricModel):
    n = model.tiles
    base = [
        box(0.25, 0.25, 0.75, 0.75),
        Polygon([(0, 0), (0.25, 0.25), (0.25, 0.75), (0, 1)]),
        Polygon([(1, 0), (1, 1), (0.75, 0.75), (0.75, 0.25)]),
        Polygon([(0, 0), (1, 0), (0.75, 0.25), (0.25, 0.25)]),
        Polygon([(0, 1), (0.25, 0.75), (0.75, 0.75), (1, 1)]),
    ]
    polys = []
    for l in range(n):
        for m in range(n):
            for p in base:
                polys.append(shapely.affinity.affine_transform(p, [1 / n, 0, 0, 1 / n, l / n, m / n]))
    return polys


def volume(model: MetricModel, grid: Grid) -> float:
    """Riemannian area of the grid's domain by the cell-midpoint rule."""
    uc, vc = _cell_centres(grid)
    U, V = np.meshgrid(uc, vc, indexing="ij")
    cell = grid.du * grid.dv
    if model.kind in ("flat", "warped"):
        return float(np.sum(_sqrt_det_safe(model, U, V)) * cell)

    # piecewise-flat: detect cells whose corners lie in different charts
    n = model.tiles

    def label(x, y):
        l, m, lx, ly = model.to_tile(x, y)
        return block_region(lx, ly) + 5 * (l * n + m)

    du, dv = grid.du, grid.dv
    corners = [label(U + a * du, V + b * dv) for a in (-0.5, 0.5) for b in (-0.5, 0.5)]
    centre = label(U, V)
    mixed = np.zeros(U.shape, dtype=bool)
    for c in corners:
        mixed |= c != centre
    total = float(np.sum(model.sqrt_det(U[~mixed], V[~mixed])) * cell)
    if mixed.any():
        polys = _chart_polygons(model)
        tree = shapely.STRtree(polys)
        cells = shapely.box(U[mixed] - du / 2, V[mixed] - dv / 2, U[mixed] + du / 2, V[mixed] + dv / 2)
        ci, pi = tree.query(cells, predicate="intersects")
        pieces = shapely.intersection(cells[ci], np.asarray(polys, dtype=object)[pi])
        areas = shapely.area(pieces)
        ok = areas > 0
        cent = shapely.centroid(pieces[ok])
        cx, cy = shapely.get_x(cent), shapely.get_y(cent)
        lab = pi[ok]
        reg = lab % 5
        tile = lab // 5
        lx = n * cx - tile // n
        ly = n * cy - tile % n
        J = block_inverse_jacobian(reg, lx, ly, model.h)
        total += float(np.sum(areas[ok] * np.abs(np.linalg.det(J))))
    return total


# --------------------------------------------------------------------------
# tensor norms and Sobolev norms
# --------------------------------------------------------------------------

def tensor_norm(G_j, G_0):
    """Pointwise ``|g_j|_{g_0} = sqrt(tr((G_0^{-1} G_j)^2))``."""
    A = np.linalg.solve(G_0, G_j)
    return np.sqrt(np.einsum("...ij,...ji->...", A, A))


def tensor_norm_field(model_j: MetricModel, model_0: MetricModel, grid: Grid) -> ScalarField:
    """``|g_j|_{g_0}`` at every node; pole rows are set to ``nan``."""
    P = grid.points()
    U, V = P[..., 0], P[..., 1]
    pole = model_0.is_pole(U) | model_j.is_pole(U) if model_0.kind == "warped" else np.zeros(U.shape, bool)
    out = np.full(U.shape, np.nan)
    Gj = model_j.metric_tensor(U[~pole], V[~pole])
    G0 = model_0.metric_tensor(U[~pole], V[~pole])
    out[~pole] = tensor_norm(Gj, G0)
    return ScalarField(out, grid, tag=f"tensor-norm({model_j.name}|{model_0.name})")


def gradient(field: ScalarField):
    """Central-difference partial derivatives (second-order one-sided at edges)."""
    g = field.grid
    vals = field.values
    parts = []
    for axis, h, periodic in ((0, g.du, g.periodic_u), (1, g.dv, g.periodic_v)):
        if periodic:
            d = (np.roll(vals, -1, axis) - np.roll(vals, 1, axis)) / (2 * h)
        else:
            d = np.gradient(vals, h, axis=axis, edge_order=2)
        parts.append(d)
    return parts[0], parts[1]


def sobolev_w1p_norm(field: ScalarField, background: MetricModel, p: float) -> float:
    """``(int |u|^p + |grad u|^p dmu)^(1/p)`` against the background metric."""
    if p < 1:
        raise ValueError("p must be >= 1")
    grid = field.grid
    du, dv = gradient(field)
    P = grid.points()
    keep = ~background.is_pole(P[..., 0]) if background.kind == "warped" else np.ones(grid.shape, bool)
    G = background.metric_tensor(P[..., 0][keep], P[..., 1][keep])
    Ginv = np.linalg.inv(G)
    grad = np.stack([du[keep], dv[keep]], axis=-1)
    gnorm = np.sqrt(np.einsum("...i,...ij,...j->...", grad, Ginv, grad))
    w = node_weights(grid)[keep] * _sqrt_det_safe(background, P[..., 0][keep], P[..., 1][keep])
    u = field.values[keep]
    return float(np.sum(w * (np.abs(u) ** p + gnorm**p)) ** (1.0 / p))


def lp_norm(field: ScalarField, background: MetricModel, p: float) -> float:
    grid = field.grid
    P = grid.points()
    w = node_weights(grid) * _sqrt_det_safe(background, P[..., 0], P[..., 1])
    vals = np.nan_to_num(field.values)
    return float(np.sum(w * np.abs(vals) ** p) ** (1.0 / p))


# --------------------------------------------------------------------------
# traces along paths
# --------------------------------------------------------------------------

def trace_integral(field: ScalarField, path: GeodesicPath, p: float) -> float:
    """``(int_gamma |f|^p ds)^(1/p)`` by trapezoid rule in the path's arclength."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if len(path.points) == 0:
        raise ValueError("empty path")
    vals = np.abs(field.at_points(path.points)) ** p
    s = np.asarray(path.arclength)
    return float(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(s)) ** (1.0 / p))


def band_limited_field(grid: Grid, seed, modes=8) -> ScalarField:
    """Random truncated Fourier series over the grid's domain.

    Mode ``k`` has Gaussian cosine and sine coefficients of variance
    ``(1 + |k|)^-3``; the field is evaluated analytically at the nodes.
    """
    rng = np.random.default_rng(seed)
    u0, u1, v0, v1 = grid.domain
    P = grid.points()
    X = (P[..., 0] - u0) / (u1 - u0)
    Y = (P[..., 1] - v0) / (v1 - v0)
    vals = np.zeros(grid.shape)
    for k1 in range(modes + 1):
        for k2 in range(-modes, modes + 1):
            if k1 == 0 and k2 < 0:
                continue
            sd = (1.0 + math.hypot(k1, k2)) ** -1.5
            a, b = rng.normal(0.0, sd, size=2)
            phase = 2 * math.pi * (k1 * X + k2 * Y)
            vals += a * np.cos(phase) + b * np.sin(phase)
    return ScalarField(vals, grid, tag=f"band-limited(seed={seed})")


@dataclass
class TraceRatioResult:
    max_ratio: float
    table: list = field(default_factory=list)  # (field seed, norm, best trace, best ratio)
    longest_path: float = 0.0


def trace_ratio_test(background: MetricModel, grid: Grid, p=1.0, n_fields=20, n_paths=100, seed=0,
                     fields=None):
    """Largest sampled ratio of trace norm to ``W^{1,p}`` norm.

    Geodesics join random point pairs (drawn from ``seed``, so the same pairs
    are used on every grid).  Zero-norm fields are resampled.
    """
    if background.kind not in ("flat", "warped"):
        raise ValueError("trace ratio test needs a smooth background")
    rng = np.random.default_rng(seed)
    u0, u1, v0, v1 = grid.domain
    ends = rng.random((n_paths, 2, 2))
    ends[..., 0] = u0 + (u1 - u0) * ends[..., 0]
    ends[..., 1] = v0 + (v1 - v0) * ends[..., 1]
    build_graph(background, grid)
    paths = []
    for a, b in ends:
        paths.append(geodesic_path(single_source(background, grid, a), b))
    if fields is None:
        fields = []
        fseed = seed * 1000
        while len(fields) < n_fields:
            f = band_limited_field(grid, fseed)
            fseed += 1
            if sobolev_w1p_norm(f, background, p) > 1e-12:
                fields.append(f)
    result = TraceRatioResult(0.0, longest_path=max(pa.length for pa in paths))
    for f in fields:
        norm = sobolev_w1p_norm(f, background, p)
        traces = [trace_integral(f, pa, p) for pa in paths if len(pa.points) > 1]
        best = max(traces) if traces else 0.0
        ratio = best / norm
        result.table.append((f.tag, norm, best, ratio))
        result.max_ratio = max(result.max_ratio, ratio)
    return result


# --------------------------------------------------------------------------
# densities
# --------------------------------------------------------------------------

@dataclass
class DensityEstimate:
    center: tuple
    radii: np.ndarray
    ratios: np.ndarray


def density_estimate(model: MetricModel, grid: Grid, center, radii) -> DensityEstimate:
    """``vol(B(center, r)) / r^2`` from node membership in the graph ball."""
    radii = np.asarray(sorted(radii, reverse=True), dtype=float)
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")
    field_ = single_source(model, grid, center)
    finite = field_.values[np.isfinite(field_.values)]
    if radii[0] > finite.max():
        raise ValueError("radius exceeds the reachable diameter")
    meas = node_measure(model, grid)
    # a pole vertex is counted once
    seen = np.zeros(grid.shape, dtype=bool)
    ids = grid.node_ids()
    _, first = np.unique(ids, return_index=True)
    seen.flat[first] = True
    ratios = []
    for r in radii:
        inside = (field_.values < r) & seen
        ratios.append(float(np.sum(meas[inside])) / r**2)
    return DensityEstimate(tuple(map(float, center)), radii, np.array(ratios))
