"""Named experiments tying models, grids and the analysis functionals together.

Each experiment fills an :class:`~sobolev_geodesics.report.ExperimentReport`
with rows comparing computed quantities against closed forms.  Every
randomised choice is drawn from ``numpy.random.default_rng(config.seed)``
so a report is a pure function of its configuration.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate

from . import references as ref
from .convergence_analysis import (
    DistanceModel,
    fit_holder,
    gh_upper_bound,
    pointwise_convergence_report,
    uniform_distance,
)
from .field_calculus import (
    ScalarField,
    density_estimate,
    lp_norm,
    sobolev_w1p_norm,
    tensor_norm_field,
    trace_integral,
    trace_ratio_test,
    volume,
)
from .geodesic_engine import (
    MAX_NODES,
    DistanceMatrix,
    Grid,
    GridTooLarge,
    distance_matrix,
    geodesic_path,
    multi_source,
    single_source,
    stencil_overshoot,
)
from .metric_models import MetricModel, WarpingFunction
from .report import ExperimentReport


class ConfigError(ValueError):
    pass


# per-experiment defaults; ``None`` means "not used by this experiment"
_DEFAULTS = {
    "flat-check": dict(grid=256, local_grid=512, pairs=50, radii=[0.1]),
    "nonuniform": dict(j=[2, 4], grid=256, local_grid=512, pairs=200, volume_j=10),
    "power-holder": dict(j=[1, 2, 4, 8, 16, 32], samples=64),
    "cusp": dict(j=[math.inf], grid=2048, n_v=64, radii=[0.4, 0.2, 0.1]),
    "cone": dict(j=[math.inf], grid=2048, n_v=64, radii=[0.4, 0.2, 0.1]),
    "cinch": dict(j=[32], grid=256, n_v=128, pairs=200),
    "blocks": dict(h=[2.0, 5.0], grid=256, pairs=20),
    "tiled": dict(j=[2, 3], grid=256, pairs=200),
    "holder-lambda": dict(j=[2, 3, 4, 5, 6], samples=10_000),
    "trace": dict(grid=64, fields=20, paths=100),
    "trace-counterexample": dict(grid=64, doublings=3),
}

_TOLERANCES = {
    "flat-check": {"ratio": 1e-12, "volume": 1e-10, "density": 0.05},
    "nonuniform": {"distance_j2": 0.03, "distance": 0.05, "ratio": 0.05, "volume_quad": 1e-6},
    "power-holder": {"deviation": 1e-12, "lambda": 1e-12},
    "cusp": {},
    "cone": {"density": 0.10},
    "cinch": {"waist": 0.10, "oracle": 0.10},
    "blocks": {"volume": 0.01, "boundary": 0.03, "hausdorff": 0.03},
    "tiled": {"volume": 0.01, "gridline": 0.03, "gh": 0.03},
    "holder-lambda": {"bound": 1e-12},
    "trace": {"stability": 0.25},
    "trace-counterexample": {"growth": 0.0, "lq_change": 0.02},
}

EXPERIMENTS = tuple(_DEFAULTS)

_DESCRIPTIONS = {
    "flat-check": "graph distances on the flat square against Euclidean distance",
    "nonuniform": "warping with a tall narrow bump: Hölder but not Lipschitz distances",
    "power-holder": "|x-y|^(1/j) against the discrete metric: pointwise but not uniform limit",
    "cusp": "sphere-like warping with a cusp tip: vanishing density at the pole",
    "cone": "sphere-like warping with a cone tip: positive density at the pole",
    "cinch": "torus pinched to a waist h0: the lower distance bound fails",
    "blocks": "piecewise-flat box metric on the square: volume and boundary distances",
    "tiled": "2^j x 2^j tiling of box metrics: convergence to the taxi metric",
    "holder-lambda": "Hölder constant of min((2+h)s, 2s+delta) on (0, 2]",
    "trace": "sampled trace-to-Sobolev ratio and its refinement stability",
    "trace-counterexample": "log-distance field whose trace blows up while its L^q norm stays put",
}

_SCALAR_KEYS = {
    "eta": (float, lambda x: 0 < x <= 2),
    "h0": (float, lambda x: 0 < x <= 1),
    "alpha": (float, lambda x: 0 < x <= 1),
    "p": (float, lambda x: x >= 1),
    "q": (float, lambda x: x >= 1),
    "grid": (int, lambda x: 8 <= x),
    "n_v": (int, lambda x: 8 <= x),
    "local_grid": (int, lambda x: 8 <= x),
    "stencil": (int, lambda x: x in (8, 16)),
    "pairs": (int, lambda x: x >= 1),
    "samples": (int, lambda x: x >= 2),
    "seed": (int, lambda x: x >= 0),
    "fields": (int, lambda x: x >= 1),
    "paths": (int, lambda x: x >= 1),
    "doublings": (int, lambda x: x >= 1),
    "volume_j": (int, lambda x: x >= 1),
}


@dataclass
class ExperimentConfig:
    name: str
    j: list | None = None
    eta: float = 0.5
    h0: float = 0.5
    h: list | None = None
    alpha: float = 0.5
    p: float = 1.0
    q: float = 2.0
    grid: int | None = None
    n_v: int | None = None
    local_grid: int | None = None
    stencil: int = 16
    pairs: int | None = None
    samples: int | None = None
    seed: int = 0
    fields: int | None = None
    paths: int | None = None
    doublings: int | None = None
    volume_j: int | None = None
    radii: list | None = None
    tolerances: dict = field(default_factory=dict)
    out: str | None = None

    @classmethod
    def from_mapping(cls, name, mapping=None):
        """Validated config for ``name``; unknown keys raise :class:`ConfigError`.

        Tolerance overrides are flat keys ``tol_<name>``.
        """
        if name not in _DEFAULTS:
            raise ConfigError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")
        mapping = dict(mapping or {})
        named = mapping.pop("name", None)
        if named not in (None, name):
            raise ConfigError(f"config names experiment {named!r}, not {name!r}")
        vals = dict(_DEFAULTS[name])
        tols = dict(_TOLERANCES[name])
        for key, raw in mapping.items():
            if key.startswith("tol_"):
                tkey = key[4:]
                if tkey not in tols:
                    raise ConfigError(f"{name} has no tolerance {tkey!r}; known: {sorted(tols)}")
                tols[tkey] = _number(key, raw, float, lambda x: x >= 0)
            elif key == "j":
                vals["j"] = _j_list(raw)
            elif key == "h":
                vals["h"] = _float_list("h", raw, lambda x: x > 1)
            elif key == "radii":
                vals["radii"] = _float_list("radii", raw, lambda x: x > 0)
            elif key == "out":
                vals["out"] = None if raw is None else str(raw)
            elif key in _SCALAR_KEYS:
                typ, ok = _SCALAR_KEYS[key]
                vals[key] = _number(key, raw, typ, ok)
            else:
                raise ConfigError(f"unknown config key {key!r}")
        return cls(name=name, tolerances=tols, **vals)

    def tol(self, key):
        return self.tolerances[key]

    def echo(self):
        d = asdict(self)
        d["j"] = None if self.j is None else [_j_str(j) for j in self.j]
        return d


def _number(key, raw, typ, ok):
    if isinstance(raw, bool):
        raise ConfigError(f"{key} must be numeric")
    try:
        val = typ(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be {typ.__name__}, got {raw!r}") from None
    if typ is int and float(raw) != val:
        raise ConfigError(f"{key} must be an integer, got {raw!r}")
    if typ is float and not math.isfinite(val):
        raise ConfigError(f"{key} must be finite")
    if not ok(val):
        raise ConfigError(f"{key}={raw!r} is out of range")
    return val


def _as_list(raw):
    return list(raw) if isinstance(raw, (list, tuple)) else [raw]


def _j_list(raw):
    out = []
    for x in _as_list(raw):
        if isinstance(x, str) and x.strip().lower() in ("inf", "infinity"):
            out.append(math.inf)
        elif isinstance(x, float) and math.isinf(x):
            out.append(math.inf)
        else:
            out.append(_number("j", x, int, lambda v: v >= 1))
    if not out:
        raise ConfigError("j list is empty")
    return out


def _float_list(key, raw, ok):
    out = [_number(key, x, float, ok) for x in _as_list(raw)]
    if not out:
        raise ConfigError(f"{key} list is empty")
    return out


def _j_str(j):
    return "inf" if math.isinf(j) else int(j)


def load_config(path):
    """Read a flat ``key: value`` YAML file."""
    import yaml

    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a key/value mapping")
    for k, v in data.items():
        if isinstance(v, dict):
            raise ConfigError(f"config is flat; key {k!r} holds a nested mapping")
    return data


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------

def _axioms(rep, case, D: DistanceMatrix):
    sym, diag, tri = D.check_axioms()
    rep.check(case, "matrix symmetric", sym)
    rep.check(case, "matrix zero diagonal", diag)
    rep.check(case, "matrix triangle inequality", tri)


def _n_points(pairs):
    """Smallest sample size with at least ``pairs`` distinct pairs."""
    return max(2, math.ceil((1 + math.sqrt(1 + 8 * pairs)) / 2))


def _random_nodes(grid: Grid, rng, count, mask=None):
    """``count`` distinct grid points drawn without replacement."""
    P = grid.points().reshape(-1, 2)
    idx = np.arange(len(P)) if mask is None else np.flatnonzero(mask.ravel())
    if count > len(idx):
        raise ConfigError("more samples requested than grid nodes available")
    pick = rng.choice(idx, size=count, replace=False)
    return P[np.sort(pick)]


def _check_size(*grids):
    for g in grids:
        if g.n_nodes > MAX_NODES:
            raise GridTooLarge(f"grid with {g.n_nodes} nodes exceeds the limit of {MAX_NODES}")


def _fmt(x):
    return f"{x:g}"


# --------------------------------------------------------------------------
# Hölder constant of the tiled comparison function
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class HolderLambda:
    lambda_alpha: float
    argmax: float
    kink: float | None
    kink_ratio: float | None
    endpoint_ratio: float
    small_s_ratio: float
    bound_holds: bool


def comparison_function(s, h, delta):
    return np.minimum((2 + h) * s, 2 * s + delta)


def holder_lambda_search(j, h, alpha, n_grid=10_000):
    """Least ``lam`` with ``min((2+h)s, 2s+delta_j) <= lam s**alpha`` on an s-grid over (0, 2].

    The grid is augmented by the kink ``s = delta_j/h`` and the endpoint
    ``s = 2``; the ratio as ``s -> 0`` is reported separately (it tends to 0
    for ``alpha < 1`` and to ``2 + h`` for ``alpha = 1``).
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    if h < 0:
        raise ValueError("h must be nonnegative")
    delta = ref.tiled_delta(j, h)
    s = np.linspace(2.0 / n_grid, 2.0, n_grid)
    kink = delta / h if h > 0 else None
    extra = [2.0] + ([kink] if kink is not None and kink <= 2 else [])
    s = np.union1d(s, extra)
    ratio = comparison_function(s, h, delta) / s**alpha
    k = int(np.argmax(ratio))
    lam = float(ratio[k])
    small = (2 + h) if alpha == 1 else 0.0
    lam = max(lam, small)
    kink_ratio = None
    if kink is not None:
        kink_ratio = float(comparison_function(kink, h, delta) / kink**alpha)
    holds = bool(np.all(comparison_function(s, h, delta) <= lam * s**alpha * (1 + 1e-15)))
    end = float(comparison_function(2.0, h, delta) / 2.0**alpha)
    return HolderLambda(lam, float(s[k]), kink, kink_ratio, end, float(small), holds)


# --------------------------------------------------------------------------
# log-distance trace counterexample
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LogTraceSample:
    n: int
    offset: float
    trace: float
    lq_norm: float
    path_length: float


def log_distance_field(grid: Grid) -> ScalarField:
    """``log d(w, gamma)`` for the segment ``gamma = {0} x [-1/4, 1/4]``."""
    P = grid.points()
    X, Y = P[..., 0], P[..., 1]
    d = np.hypot(X, np.maximum(np.abs(Y) - 0.25, 0.0))
    with np.errstate(divide="ignore"):
        vals = np.log(d)
    return ScalarField(vals, grid, tag="log-distance")


def log_distance_trace(n, p=1.0, q=2.0) -> LogTraceSample:
    """Trace of the log-distance field along the node column nearest to the segment.

    ``n`` must be even so no node lies on the segment itself; the nearest
    column sits half a grid spacing away and the trace grows like
    ``|log(spacing)|``.
    """
    if n % 2:
        raise ValueError("use an even node count so the segment avoids the nodes")
    flat = MetricModel.flat((-0.5, 0.5, -0.5, 0.5))
    grid = Grid.for_model(flat, n)
    f = log_distance_field(grid)
    x0 = float(grid.u[n // 2])
    a, b = (x0, -0.25), (x0, 0.25)
    path = geodesic_path(single_source(flat, grid, a), b)
    return LogTraceSample(n, x0, trace_integral(f, path, p), lp_norm(f, flat, q), path.length)


# --------------------------------------------------------------------------
# the experiments
# --------------------------------------------------------------------------

def _flat_check(cfg, rep, rng):
    n = cfg.grid + 1
    flat = MetricModel.flat()
    grid = Grid.for_model(flat, n, stencil=cfg.stencil)
    _check_size(grid)
    pts = _random_nodes(grid, rng, 2 * cfg.pairs)
    D = distance_matrix(flat, grid, pts)
    i = np.arange(cfg.pairs)
    k = i + cfg.pairs
    euclid = np.hypot(*(D.points[i] - D.points[k]).T)
    ratio = D.values[i, k] / euclid
    case = f"grid={n}x{n} stencil={cfg.stencil} pairs={cfg.pairs}"
    rep.add(case, "min graph/euclid ratio >= 1", ratio.min(), 1.0, cfg.tol("ratio"), ">=")
    rep.add(case, "max graph/euclid ratio <= 1.03", ratio.max(), 1.03, cfg.tol("ratio"), "<=")
    rep.add(case, "max graph/euclid ratio <= stencil overshoot", ratio.max(),
            stencil_overshoot(cfg.stencil), cfg.tol("ratio"), "<=")
    _axioms(rep, case, D)
    rep.add(f"grid={n}x{n}", "volume", volume(flat, grid), 1.0, cfg.tol("volume"))
    nl = cfg.local_grid + 1
    lgrid = Grid.for_model(flat, nl, stencil=cfg.stencil)
    _check_size(lgrid)
    est = density_estimate(flat, lgrid, (0.5, 0.5), cfg.radii)
    for r, val in zip(est.radii, est.ratios):
        rep.add(f"center=(0.5,0.5) grid={nl}x{nl} r={_fmt(r)}", "ball volume / r^2",
                val, math.pi, cfg.tol("density"))


def _nonuniform(cfg, rep, rng):
    eta = cfg.eta
    js = cfg.j
    if any(math.isinf(j) for j in js):
        raise ConfigError("nonuniform needs finite j")
    base = MetricModel.warped(WarpingFunction.constant(1.0), name="constant")
    nl = cfg.local_grid + 1
    ratios = []
    for j in js:
        vals = ref.reference_values("nonuniform", j=j, eta=eta)
        model = MetricModel.warped(WarpingFunction.nonuniform(j, eta))
        p, q = ref.nonuniform_points(j)
        L = p[0] * -1
        window = (-4 * L, 4 * L, -3.5 * L, 4.5 * L)
        case = f"j={j} eta={_fmt(eta)} window grid={nl}x{nl}"
        g = Grid.for_model(model, nl, stencil=cfg.stencil, domain=window)
        _check_size(g)
        fj = single_source(model, g, p)
        dj = fj.at(q)
        d0 = single_source(base, Grid.for_model(base, nl, stencil=cfg.stencil, domain=window), p).at(q)
        tol = cfg.tol("distance_j2") if j <= 2 else cfg.tol("distance")
        rep.add(case, "d_j(p_j,q_j) vs L(C_j)", dj, vals["L(C_j)"], tol)
        rep.add(case, "d_inf(p_j,q_j)", d0, vals["d_inf(p_j,q_j)"], tol)
        ratio = dj / d0
        ratios.append(ratio)
        rep.add(case, "d_j/d_inf at (p_j,q_j)", ratio, vals["lipschitz ratio"], cfg.tol("ratio"))
        rep.add(case, "d_j/d_inf^(1-eta/2) at (p_j,q_j)", dj / d0 ** (1 - eta / 2),
                vals["L(C_j)"] / vals["d_inf(p_j,q_j)"] ** (1 - eta / 2), cfg.tol("ratio"))
        rep.add(case, "(1/sqrt5) sqrt(j^2eta+2j^eta+5)/j^eta", vals["holder ratio"])
        path = geodesic_path(fj, q)
        reach = max(abs(pt[0]) for pt in path.points)
        rep.add(case, "max |r| along geodesic <= 1/(4j)", reach, 1 / (4 * j), 0.0, "<=")
    if len(ratios) > 1:
        ordered = [r for _, r in sorted(zip(js, ratios))]
        rep.check(f"j={','.join(map(str, js))}", "d_j/d_inf strictly increasing in j",
                  bool(np.all(np.diff(ordered) > 0)))

    # global volumes
    bound = 16 * math.pi
    for j in range(1, cfg.volume_j + 1):
        w = WarpingFunction.nonuniform(j, eta)
        model = MetricModel.warped(w)
        g = Grid.for_model(model, 20001, 8)
        vol = volume(model, g)
        quad = 2 * math.pi * _quad_warping(w, j)
        case = f"j={j} eta={_fmt(eta)} grid=20001x8"
        rep.add(case, "volume <= 16 pi", vol, bound, 0.0, "<=")
        rep.add(case, "volume vs 2 pi int f_j dr", vol, quad, cfg.tol("volume_quad"))
        rep.add(case, "volume <= 4pi(j^eta+1)/j + 4pi(1-1/j)", vol,
                ref.nonuniform_volume_estimate(j, eta), 0.0, "<=")

    # global distance matrices: domination and convergence against f = 1
    n = cfg.grid + 1
    gb = Grid.for_model(base, n, cfg.grid, stencil=cfg.stencil)
    _check_size(gb)
    npts = _n_points(cfg.pairs)
    r = rng.uniform(0.1, 1.0, npts) * rng.choice([-1.0, 1.0], npts)
    th = rng.uniform(0, 2 * math.pi, npts)
    samples = np.stack([r, th], axis=1)
    D0 = distance_matrix(base, gb, samples)
    _axioms(rep, f"f=1 grid={n}x{cfg.grid} samples={npts}", D0)
    seq = []
    for j in js:
        model = MetricModel.warped(WarpingFunction.nonuniform(j, eta))
        Dj = distance_matrix(model, Grid.for_model(model, n, cfg.grid, stencil=cfg.stencil), samples)
        seq.append(Dj)
        case = f"j={j} grid={n}x{cfg.grid} samples={npts}"
        _axioms(rep, case, Dj)
        rep.check(case, "d_j >= d_(f=1) on every sampled pair",
                  bool(np.all(Dj.values >= D0.values - 1e-12)))
        rep.add(case, "uniform distance to f=1", uniform_distance(Dj, D0))
        w1 = sobolev_w1p_norm(tensor_norm_field(model, base, gb), base, 2.0)
        rep.add(case, "W^{1,2} norm of |g_j|_{g_0}", w1)
    if len(seq) > 1:
        table = pointwise_convergence_report(seq, D0, steps=js)
        rep.check(f"j={','.join(map(str, js))}", "uniform distance to f=1 decreasing in j",
                  bool(np.all(np.diff(table.sup) < 0)))


def _quad_warping(w, j):
    edges = sorted({-1.0, -1 / j, -1 / (2 * j), 1 / (2 * j), 1 / j, 1.0})
    return sum(integrate.quad(w, a, b, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
               for a, b in zip(edges[:-1], edges[1:]))


def _power_holder(cfg, rep, rng):
    n = cfg.samples
    x = np.linspace(0.0, 1.0, n)
    disc = DistanceModel("discrete").on(x)
    seq = [DistanceModel("power", j=int(j)).on(x) for j in cfg.j]
    table = pointwise_convergence_report(seq, disc, steps=list(cfg.j))
    _axioms(rep, f"discrete samples={n}", disc)
    for j, D in zip(cfg.j, seq):
        _axioms(rep, f"power j={int(j)} samples={n}", D)
    for j, sup in zip(cfg.j, table.sup):
        vals = ref.reference_values("power-holder", j=int(j), n=n)
        rep.add(f"j={int(j)} samples={n} min separation=1/{n - 1}", "sup |power_j - discrete|",
                sup, vals["sup deviation"], cfg.tol("deviation"))
    js = "j=" + ",".join(str(int(j)) for j in cfg.j)
    rep.check(js, "sup deviation positive for every j", bool(table.sup.min() > 0))
    # the sup sits at the closest pair, so refining the sample pushes it back towards 1
    jmax = int(max(cfg.j))
    sups = []
    for m in (n, n**2, n**3, n**4):
        pair = np.array([0.0, 1.0 / (m - 1)])
        sups.append(uniform_distance(DistanceModel("power", j=jmax).on(pair),
                                     DistanceModel("discrete").on(pair)))
        rep.add(f"j={jmax} min separation=1/{m - 1}", "sup |power_j - discrete|", sups[-1],
                1 - (1.0 / (m - 1)) ** (1.0 / jmax), cfg.tol("deviation"))
    rep.check(f"j={jmax}", "sup deviation increases under sample refinement",
              bool(np.all(np.diff(sups) > 0)))
    moving = table.deviations[:, table.deviations[0] > 0]
    rep.check(js, "every fixed-pair deviation decreasing in j",
              bool(np.all(np.diff(moving, axis=0) < 0)))
    i_half = int(np.argmin(np.abs(x - 0.5)))
    for j, D in zip(cfg.j, seq):
        dev = abs(D.values[0, i_half] - 1.0)
        rep.add(f"j={int(j)} pair=(0,{_fmt(x[i_half])})", "fixed-pair deviation",
                dev, 1 - x[i_half] ** (1 / j), cfg.tol("deviation"))
    D2 = DistanceModel("power", j=2).on(x)
    D1 = DistanceModel("power", j=1).on(x)
    fit = fit_holder(D2, D1, 0.5)
    rep.add(f"samples={n} alpha=1/2", "lambda_hat power(2) vs power(1)", fit.lambda_hat, 1.0,
            cfg.tol("lambda"))
    rep.check(f"samples={n} alpha=1/2", "fit certifies the sample sandwich", fit.certifies(D2, D1))


def _pole_density(cfg, rep, family):
    n = cfg.grid + 1
    for j in cfg.j:
        w = getattr(WarpingFunction, family)(j)
        model = MetricModel.warped(w)
        g = Grid.for_model(model, n, cfg.n_v, stencil=cfg.stencil)
        _check_size(g)
        est = density_estimate(model, g, (math.pi, 0.0), cfg.radii)
        case = f"{family} j={_j_str(j)} pole r=pi grid={n}x{cfg.n_v}"
        for r, val in zip(est.radii, est.ratios):
            if family == "cone" and math.isinf(j):
                rep.add(f"{case} r={_fmt(r)}", "ball volume / r^2", val, 2.0,
                        cfg.tol("density") if r == min(est.radii) else None)
            else:
                rep.add(f"{case} r={_fmt(r)}", "ball volume / r^2", val)
        lo, hi = est.ratios[-1], est.ratios[0]
        rr = f"{_fmt(est.radii[-1])}/{_fmt(est.radii[0])}"
        if family == "cusp" and math.isinf(j):
            rep.add(case, f"ratio({rr}) <= 0.5", lo / hi, 0.5, 0.0, "<=")
            rep.check(case, "ratio decreasing as r shrinks", bool(np.all(np.diff(est.ratios) < 0)))
        else:
            rep.add(case, f"ratio({rr})", lo / hi)


def _cusp(cfg, rep, rng):
    _pole_density(cfg, rep, "cusp")


def _cone(cfg, rep, rng):
    _pole_density(cfg, rep, "cone")


def _cinch(cfg, rep, rng):
    h0 = cfg.h0
    base = MetricModel.warped(WarpingFunction.constant(1.0, -math.pi, math.pi), periodic_u=True,
                              name="constant")
    for j in cfg.j:
        if math.isinf(j):
            raise ConfigError("cinch needs finite j")
        model = MetricModel.warped(WarpingFunction.cinch(int(j), h0), periodic_u=True)
        g = Grid.for_model(model, cfg.grid, cfg.n_v, stencil=cfg.stencil)
        g2 = Grid.for_model(model, 2 * cfg.grid, 2 * cfg.n_v, stencil=cfg.stencil)
        _check_size(g, g2)
        case = f"j={int(j)} h0={_fmt(h0)} grid={cfg.grid}x{cfg.n_v}"
        a, b = (0.0, 0.0), (0.0, math.pi)
        d = single_source(model, g, a).at(b)
        d2 = single_source(model, g2, a).at(b)
        rep.add(case, "d_j((0,0),(0,pi)) vs h0 pi", d, ref.reference_values("cinch", h0=h0)["waist distance"],
                cfg.tol("waist"))
        rep.add(case, "d_j((0,0),(0,pi)) vs double-resolution oracle", d, d2, cfg.tol("oracle"))
        npts = _n_points(cfg.pairs)
        samples = np.vstack([[a, b], _random_nodes(g, rng, npts - 2)])
        Dj = distance_matrix(model, g, samples)
        D0 = distance_matrix(base, Grid.for_model(base, cfg.grid, cfg.n_v, stencil=cfg.stencil), samples)
        _axioms(rep, case, Dj)
        _axioms(rep, f"f=1 grid={cfg.grid}x{cfg.n_v}", D0)
        fit = fit_holder(Dj, D0, 1.0)
        rep.add(f"{case} samples={npts}", "min d_j/d_0 <= h0 + 0.1", fit.c_hat, h0 + 0.1, 0.0, "<=")
        rep.check(f"{case} samples={npts}", "lower bound d_j >= d_0 fails", fit.c_hat < 1.0)


def _blocks(cfg, rep, rng):
    n = cfg.grid + 1
    for h in cfg.h:
        model = MetricModel.block(h)
        g = Grid.for_model(model, n, stencil=cfg.stencil)
        _check_size(g)
        vals = ref.reference_values("blocks", h=h)
        case = f"h={_fmt(h)} grid={n}x{n}"
        rep.add(case, "volume vs 1+4h", volume(model, g), vals["volume"], cfg.tol("volume"))
        P = g.points()
        on_edge = np.zeros(g.shape, dtype=bool)
        on_edge[0, :] = on_edge[-1, :] = on_edge[:, 0] = on_edge[:, -1] = True
        pts = _random_nodes(g, rng, 2 * cfg.pairs, on_edge)
        D = distance_matrix(model, g, pts)
        _axioms(rep, case, D)
        for i in range(cfg.pairs):
            a, b = D.points[i], D.points[i + cfg.pairs]
            rep.add(f"{case} pair=({_fmt(a[0])},{_fmt(a[1])})-({_fmt(b[0])},{_fmt(b[1])})",
                    "distance vs boundary path length", D.values[i, i + cfg.pairs],
                    ref.boundary_path_length(a, b), cfg.tol("boundary"))
        dist = multi_source(model, g, P[on_edge])
        rep.add(case, "max distance to boundary <= h + sqrt2", float(dist.max()),
                vals["hausdorff bound"], cfg.tol("hausdorff"), "<=")


def _tiled(cfg, rep, rng):
    n = cfg.grid + 1
    hs = cfg.h
    for idx, j in enumerate(cfg.j):
        if math.isinf(j):
            raise ConfigError("tiled needs finite j")
        j = int(j)
        h = float(j) if hs is None else hs[min(idx, len(hs) - 1)]
        N = 2**j
        if cfg.grid % (4 * N):
            raise ConfigError(f"grid must be a multiple of 4*2^j = {4 * N} so chart edges lie on nodes")
        model = MetricModel.tiled(j, h)
        g = Grid.for_model(model, n, stencil=cfg.stencil)
        _check_size(g)
        vals = ref.reference_values("tiled", j=j, h=h)
        case = f"j={j} h={_fmt(h)} grid={n}x{n}"
        cells = cfg.grid // N
        for l in range(N):
            for m in range(N):
                win = (l / N, (l + 1) / N, m / N, (m + 1) / N)
                tg = Grid.for_model(model, cells + 1, stencil=cfg.stencil, domain=win)
                rep.add(f"{case} tile=({l},{m})", "tile volume vs (1+4h)/4^j", volume(model, tg),
                        vals["tile volume"], cfg.tol("volume"))
        rep.add(case, "volume vs 1+4h", volume(model, g), vals["volume"], cfg.tol("volume"))

        P = g.points()
        k = np.arange(n) % cells == 0
        on_lines = k[:, None] | k[None, :]
        vertices = k[:, None] & k[None, :]
        npts = _n_points(cfg.pairs)
        taxi = DistanceModel("taxi")

        vert_pts = _random_nodes(g, rng, min(npts, int(vertices.sum())), vertices)
        Dv = distance_matrix(model, g, vert_pts)
        Tv = taxi.on(Dv.points)
        off = ~np.eye(len(Dv), dtype=bool)
        vcase = f"{case} lattice-vertex samples={len(Dv)}"
        _axioms(rep, vcase, Dv)
        rep.add(vcase, "max |d/taxi - 1|", np.max(np.abs(Dv.values[off] / Tv.values[off] - 1)),
                0.0, cfg.tol("gridline"), "<=")

        line_pts = _random_nodes(g, rng, npts, on_lines)
        D = distance_matrix(model, g, line_pts)
        T = taxi.on(D.points)
        off = ~np.eye(len(D), dtype=bool)
        lattice = np.array([[ref.lattice_path_length(a, b, N) for b in D.points] for a in D.points])
        lcase = f"{case} grid-line samples={npts}"
        _axioms(rep, lcase, D)
        rep.add(lcase, "max |d/lattice path - 1|", np.max(np.abs(D.values[off] / lattice[off] - 1)),
                0.0, cfg.tol("gridline"), "<=")
        rep.add(lcase, "max |d/taxi - 1|", np.max(np.abs(D.values[off] / T.values[off] - 1)))
        rep.add(lcase, "max (d - taxi) <= 1/2^j", float(np.max(D.values - T.values)), 1.0 / N,
                cfg.tol("gridline"), "<=")

        mixed = np.vstack([line_pts, _random_nodes(g, rng, npts)])
        Dm = distance_matrix(model, g, mixed)
        Tm = taxi.on(Dm.points)
        _axioms(rep, f"{case} mixed samples={2 * npts}", Dm)
        gh = gh_upper_bound(Dm, Tm)
        rep.add(f"{case} mixed samples={2 * npts}", "GH upper bound vs taxi <= delta_j", gh,
                vals["delta_j"], cfg.tol("gh"), "<=")
        rep.add(f"{case} mixed samples={2 * npts}", "sampled diameter <= 2 + delta_j",
                float(Dm.values.max()), vals["diameter bound"], cfg.tol("gh"), "<=")
        # the box tops are the farthest points from the tile grid
        dist = multi_source(model, g, P[on_lines])
        rep.add(case, "max distance to grid lines <= (h + sqrt2)/2^j", float(dist.max()),
                ref.block_hausdorff_bound(h) / N, cfg.tol("gh"), "<=")


def _holder_lambda(cfg, rep, rng):
    alpha = cfg.alpha
    hs = cfg.h
    for idx, j in enumerate(cfg.j):
        j = int(j)
        h = float(j) if hs is None else hs[min(idx, len(hs) - 1)]
        res = holder_lambda_search(j, h, alpha, cfg.samples)
        case = f"j={j} h={_fmt(h)} alpha={_fmt(alpha)} delta_j={ref.tiled_delta(j, h):.6g} s-grid={cfg.samples}"
        rep.add(case, "lambda_alpha", res.lambda_alpha)
        rep.add(case, "argmax s", res.argmax)
        rep.check(case, "f_j(s) <= lambda s^alpha on the s-grid", res.bound_holds)
        if res.kink is not None:
            rep.add(case, "kink s = delta_j/h", res.kink)
            rep.add(case, "lambda >= f_j(kink)/kink^alpha", res.lambda_alpha, res.kink_ratio,
                    cfg.tol("bound"), ">=")
            adm = res.lambda_alpha * (0.5**j) ** (alpha - 1)
            rep.add(case, "h <= lambda (1/2^j)^(alpha-1)", h, adm, 0.0, "<=")
        rep.add(case, "f_j(2)/2^alpha", res.endpoint_ratio)


def _trace(cfg, rep, rng):
    flat = MetricModel.flat()
    results = []
    for n in (cfg.grid, 2 * cfg.grid):
        g = Grid.for_model(flat, n + 1, stencil=cfg.stencil)
        _check_size(g)
        res = trace_ratio_test(flat, g, p=cfg.p, n_fields=cfg.fields, n_paths=cfg.paths, seed=cfg.seed)
        results.append(res)
        case = f"flat p={_fmt(cfg.p)} grid={n + 1}x{n + 1} fields={cfg.fields} paths={cfg.paths}"
        rep.add(case, "max trace/W^{1,p} ratio", res.max_ratio)
        rep.check(case, "max ratio finite", math.isfinite(res.max_ratio))
        const = ScalarField(np.ones(g.shape), g, tag="constant")
        cres = trace_ratio_test(flat, g, p=cfg.p, n_fields=1, n_paths=cfg.paths, seed=cfg.seed,
                                fields=[const])
        rep.add(case, "constant-field ratio vs L_max^(1/p)/Vol^(1/p)", cres.max_ratio,
                cres.longest_path ** (1 / cfg.p), 1e-9)
    rep.add(f"flat p={_fmt(cfg.p)} grids={cfg.grid},{2 * cfg.grid}",
            "max ratio refinement stability", results[1].max_ratio, results[0].max_ratio,
            cfg.tol("stability"))


def _trace_counterexample(cfg, rep, rng):
    # here ``grid`` counts nodes: an even count keeps every column off the segment
    n0 = cfg.grid + (cfg.grid % 2)
    sizes = [n0 * 2**k for k in range(cfg.doublings + 1)]
    for n in sizes:
        _check_size(Grid.for_model(MetricModel.flat((-0.5, 0.5, -0.5, 0.5)), n))
    samples = [log_distance_trace(n, cfg.p, cfg.q) for n in sizes]
    for s in samples:
        case = f"grid={s.n}x{s.n} column offset={s.offset:.6g}"
        rep.add(case, f"trace L^{_fmt(cfg.p)} along gamma", s.trace)
        rep.add(case, f"L^{_fmt(cfg.q)} norm", s.lq_norm)
        rep.add(case, "trace / L^q ratio", s.trace / s.lq_norm)
    for a, b in zip(samples[:-1], samples[1:]):
        case = f"grid {a.n} -> {b.n}"
        rep.add(case, "trace growth factor >= 1.1", b.trace / a.trace, 1.1, cfg.tol("growth"), ">=")
        rep.add(case, f"L^{_fmt(cfg.q)} norm change", b.lq_norm, a.lq_norm, cfg.tol("lq_change"))


_RUNNERS = {
    "flat-check": _flat_check,
    "nonuniform": _nonuniform,
    "power-holder": _power_holder,
    "cusp": _cusp,
    "cone": _cone,
    "cinch": _cinch,
    "blocks": _blocks,
    "tiled": _tiled,
    "holder-lambda": _holder_lambda,
    "trace": _trace,
    "trace-counterexample": _trace_counterexample,
}


def list_experiments():
    return [(name, _DESCRIPTIONS[name]) for name in EXPERIMENTS]


def run_experiment(config: ExperimentConfig, write=True) -> ExperimentReport:
    """Run ``config.name`` and, if ``config.out`` is set, write ``report.csv``/``report.json``.

    A grid beyond the node limit is recorded as a failing row rather than raised.
    """
    rep = ExperimentReport(config.name, config=config.echo())
    rng = np.random.default_rng(config.seed)
    try:
        _RUNNERS[config.name](config, rep, rng)
    except GridTooLarge as exc:
        rep.add("resource limit", f"grid too large: {exc}", math.nan, 0.0, 0.0)
    if write and config.out:
        rep.write(config.out)
    return rep


def run_named(name, out=None, **overrides) -> ExperimentReport:
    """Convenience wrapper: ``run_named("blocks", h=[3])``."""
    cfg = ExperimentConfig.from_mapping(name, overrides)
    cfg.out = out
    return run_experiment(cfg)


__all__ = [
    "ConfigError",
    "EXPERIMENTS",
    "ExperimentConfig",
    "HolderLambda",
    "LogTraceSample",
    "comparison_function",
    "holder_lambda_search",
    "list_experiments",
    "load_config",
    "log_distance_field",
    "log_distance_trace",
    "run_experiment",
    "run_named",
]
