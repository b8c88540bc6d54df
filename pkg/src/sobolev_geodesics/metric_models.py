"""Riemannian metrics on two-dimensional parameter rectangles.

Three families are supported:

* warped products ``g = du^2 + f(u)^2 dv^2`` with a :class:`WarpingFunction`,
* the piecewise-flat block metric ``g_h`` on ``[0, 1]^2`` (sides and top of a
  box of height ``h``), obtained by pulling back the Euclidean metric through
  five region charts,
* the tiled metric ``g_j``: ``2^j x 2^j`` rescaled copies of ``g_h``.

Every evaluation routine is vectorised over leading array axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import NamedTuple

import numpy as np

TWO_PI = 2.0 * math.pi
_EPS = 1e-12


class PointOutsideDomain(ValueError):
    pass


class PoleEvaluationError(ValueError):
    """Raised when the quadratic form is requested where the warping vanishes."""


class ParamPoint(NamedTuple):
    u: float
    v: float


# --------------------------------------------------------------------------
# warping functions
# --------------------------------------------------------------------------

def smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return 3.0 * x**2 - 2.0 * x**3


def _hermite(x, x0, x1, p0, m0, p1, m1):
    L = x1 - x0
    t = (x - x0) / L
    h00 = 2 * t**3 - 3 * t**2 + 1
    h10 = t**3 - 2 * t**2 + t
    h01 = -2 * t**3 + 3 * t**2
    h11 = t**3 - t**2
    return h00 * p0 + h10 * L * m0 + h01 * p1 + h11 * L * m1


def _cusp_limit(r):
    r = np.asarray(r, dtype=float)
    mid = _hermite(r, math.pi / 2, 3 * math.pi / 4, 1.0, 0.0, 0.25, -2.0 / math.pi)
    tail = (4.0 / math.pi**2) * (r - math.pi) ** 2
    return np.where(r <= math.pi / 2, np.sin(r), np.where(r < 3 * math.pi / 4, mid, tail))


def _cone_limit(r):
    r = np.asarray(r, dtype=float)
    mid = _hermite(r, math.pi / 2, 3 * math.pi / 4, 1.0, 0.0, 0.5, -2.0 / math.pi)
    tail = -(2.0 / math.pi) * (r - math.pi)
    return np.where(r <= math.pi / 2, np.sin(r), np.where(r < 3 * math.pi / 4, mid, tail))


@dataclass(frozen=True)
class WarpingFunction:
    """A warping profile ``f`` on ``[a, b]``.

    ``family`` is one of ``constant``, ``nonuniform``, ``cusp``, ``cone`` or
    ``cinch``.  For ``cusp`` and ``cone`` a ``j`` of ``math.inf`` selects the
    limit profile.
    """

    family: str
    a: float
    b: float
    j: float = 1.0
    eta: float = 0.5
    h0: float = 1.0
    value: float = 1.0

    def __post_init__(self):
        if self.family not in ("constant", "nonuniform", "cusp", "cone", "cinch"):
            raise ValueError(f"unknown warping family {self.family!r}")
        if self.b <= self.a:
            raise ValueError("empty warping interval")
        if self.family == "constant" and self.value <= 0:
            raise ValueError("constant warping must be positive")
        if self.family == "nonuniform" and not (0.0 < self.eta < 1.0):
            raise ValueError("eta must lie in (0, 1)")
        if self.family == "cinch" and not (0.0 < self.h0 <= 1.0):
            raise ValueError("h0 must lie in (0, 1]")
        if self.family != "constant" and not self.j >= 1:
            raise ValueError("j must be >= 1")

    # constructors -------------------------------------------------------
    @classmethod
    def constant(cls, value=1.0, a=-1.0, b=1.0):
        return cls("constant", a, b, value=float(value))

    @classmethod
    def nonuniform(cls, j, eta=0.5):
        return cls("nonuniform", -1.0, 1.0, j=float(j), eta=float(eta))

    @classmethod
    def cusp(cls, j=math.inf):
        return cls("cusp", 0.0, math.pi, j=float(j))

    @classmethod
    def cone(cls, j=math.inf):
        return cls("cone", 0.0, math.pi, j=float(j))

    @classmethod
    def cinch(cls, j, h0=0.5):
        return cls("cinch", -math.pi, math.pi, j=float(j), h0=float(h0))

    # evaluation ---------------------------------------------------------
    @property
    def plateau(self):
        """Bump height ``j**eta + 1`` of the nonuniform family."""
        return self.j**self.eta + 1.0

    def bump_profile(self, t):
        """The rescaled bump ``h_j`` on ``[-1, 1]`` (nonuniform family)."""
        a = np.abs(np.asarray(t, dtype=float))
        ramp = 1.0 + self.j**self.eta * smoothstep(2.0 * (1.0 - a))
        return np.where(a <= 0.5, self.plateau, np.where(a <= 1.0, ramp, 1.0))

    def cinch_profile(self, t):
        a = np.minimum(np.abs(np.asarray(t, dtype=float)), 1.0)
        return self.h0 + (1.0 - self.h0) * (3.0 * a**2 - 2.0 * a**3)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < self.a - _EPS) or np.any(r > self.b + _EPS):
            raise PointOutsideDomain(f"r outside [{self.a}, {self.b}]")
        fam = self.family
        if fam == "constant":
            return np.full_like(r, self.value)
        if fam == "nonuniform":
            return np.where(np.abs(r) <= 1.0 / self.j, self.bump_profile(self.j * r), 1.0)
        if fam == "cinch":
            return np.where(np.abs(r) <= 1.0 / self.j, self.cinch_profile(self.j * r), 1.0)
        limit = _cusp_limit(r) if fam == "cusp" else _cone_limit(r)
        if math.isinf(self.j):
            return limit
        return np.sin(r) / self.j + (1.0 - 1.0 / self.j) * limit

    @property
    def vanishes_at_a(self):
        return self.family in ("cusp", "cone")

    @property
    def vanishes_at_b(self):
        return self.family in ("cusp", "cone")


def warping_value(f: WarpingFunction, r):
    return f(r)


# --------------------------------------------------------------------------
# block metric charts
# --------------------------------------------------------------------------

class BlockRegion(IntEnum):
    TOP = 0
    LEFT = 1
    RIGHT = 2
    FRONT = 3
    BACK = 4

    def rectangle(self, h):
        """Pullback rectangle ``(width, height)`` for box height ``h``."""
        if self is BlockRegion.TOP:
            return (1.0, 1.0)
        if self in (BlockRegion.LEFT, BlockRegion.RIGHT):
            return (h, 1.0)
        return (1.0, h)


def block_region(x, y):
    """Region index of points of ``[0, 1]^2`` (priority top > left > right > front > back)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    e = _EPS
    top = (x >= 0.25 - e) & (x <= 0.75 + e) & (y >= 0.25 - e) & (y <= 0.75 + e)
    left = (x <= y + e) & (y <= 1 - x + e) & (x <= 0.25 + e)
    right = (1 - x <= y + e) & (y <= x + e) & (x >= 0.75 - e)
    front = (y <= x + e) & (x <= 1 - y + e) & (y <= 0.25 + e)
    out = np.full(np.broadcast(x, y).shape, int(BlockRegion.BACK))
    out = np.where(front, int(BlockRegion.FRONT), out)
    out = np.where(right, int(BlockRegion.RIGHT), out)
    out = np.where(left, int(BlockRegion.LEFT), out)
    out = np.where(top, int(BlockRegion.TOP), out)
    return out


def block_inverse(region, x, y, h):
    """Chart coordinates ``(s, t)`` of ``(x, y)`` under the inverse of ``F_region``.

    Formulas are analytic, so points slightly outside the region are mapped by
    the continuous extension of the chart.
    """
    region = np.asarray(region)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.select(
            [region == BlockRegion.TOP, region == BlockRegion.LEFT, region == BlockRegion.RIGHT],
            [2 * x - 0.5, 4 * h * x, 4 * h * (1 - x)],
            (x - y) / (1 - 2 * y),
        )
        t = np.select(
            [region == BlockRegion.TOP, region == BlockRegion.LEFT, region == BlockRegion.RIGHT,
             region == BlockRegion.FRONT],
            [2 * y - 0.5, (y - x) / (1 - 2 * x), (x - y) / (2 * x - 1), 4 * h * y],
            4 * h * (1 - y),
        )
    return s, t


def block_forward(region, s, t, h):
    """Evaluate the chart ``F_region(s, t)``."""
    region = np.asarray(region)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    a = s / (4 * h)
    b = t / (4 * h)
    x = np.select(
        [region == BlockRegion.TOP, region == BlockRegion.LEFT, region == BlockRegion.RIGHT,
         region == BlockRegion.FRONT],
        [0.25 + 0.5 * s, a, 1 - a, b * (1 - s) + (1 - b) * s],
        (1 - b) * (1 - s) + b * s,
    )
    y = np.select(
        [region == BlockRegion.TOP, region == BlockRegion.LEFT, region == BlockRegion.RIGHT,
         region == BlockRegion.FRONT],
        [0.25 + 0.5 * t, a * (1 - t) + (1 - a) * t, (1 - a) * (1 - t) + a * t, b],
        1 - b,
    )
    return x, y


def block_inverse_jacobian(region, x, y, h):
    """Jacobian ``d(s, t)/d(x, y)`` of the inverse chart, shape ``(..., 2, 2)``."""
    region = np.asarray(region)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast(region, x, y).shape
    J = np.zeros(shape + (2, 2))
    region = np.broadcast_to(region, shape)
    x = np.broadcast_to(x, shape)
    y = np.broadcast_to(y, shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        m = region == BlockRegion.TOP
        J[m] = [[2.0, 0.0], [0.0, 2.0]]
        m = region == BlockRegion.LEFT
        d = 1 - 2 * x[m]
        J[m, 0, 0] = 4 * h
        J[m, 1, 0] = (2 * y[m] - 1) / d**2
        J[m, 1, 1] = 1 / d
        m = region == BlockRegion.RIGHT
        d = 2 * x[m] - 1
        J[m, 0, 0] = -4 * h
        J[m, 1, 0] = (2 * y[m] - 1) / d**2
        J[m, 1, 1] = -1 / d
        for reg, sign in ((BlockRegion.FRONT, 1.0), (BlockRegion.BACK, -1.0)):
            m = region == reg
            d = 1 - 2 * y[m]
            J[m, 0, 0] = 1 / d
            J[m, 0, 1] = (2 * x[m] - 1) / d**2
            J[m, 1, 1] = sign * 4 * h
    return J


# --------------------------------------------------------------------------
# metric models
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricModel:
    """An immutable metric on the rectangle ``domain = (u0, u1, v0, v1)``."""

    kind: str
    domain: tuple
    warping: WarpingFunction | None = None
    h: float | None = None
    j: int | None = None
    periodic_u: bool = False
    periodic_v: bool = False
    pole_u_min: bool = False
    pole_u_max: bool = False
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in ("flat", "warped", "block", "tiled"):
            raise ValueError(f"unknown metric kind {self.kind!r}")
        u0, u1, v0, v1 = self.domain
        if not (u1 > u0 and v1 > v0):
            raise ValueError("degenerate domain")
        if self.kind == "warped" and self.warping is None:
            raise ValueError("warped model needs a warping function")
        if self.kind in ("block", "tiled") and not (self.h is not None and self.h > 1):
            raise ValueError("block height h must exceed 1")
        if self.kind == "tiled" and not (self.j is not None and int(self.j) >= 1):
            raise ValueError("tiling level j must be >= 1")

    # constructors -------------------------------------------------------
    @classmethod
    def flat(cls, domain=(0.0, 1.0, 0.0, 1.0), periodic_v=False):
        return cls("flat", tuple(map(float, domain)), periodic_v=periodic_v, name="flat")

    @classmethod
    def warped(cls, warping: WarpingFunction, period=TWO_PI, periodic_u=False, name=""):
        return cls(
            "warped",
            (warping.a, warping.b, 0.0, float(period)),
            warping=warping,
            periodic_u=periodic_u,
            periodic_v=True,
            pole_u_min=warping.vanishes_at_a,
            pole_u_max=warping.vanishes_at_b,
            name=name or warping.family,
        )

    @classmethod
    def block(cls, h):
        return cls("block", (0.0, 1.0, 0.0, 1.0), h=float(h), name=f"block(h={h:g})")

    @classmethod
    def tiled(cls, j, h=None):
        h = float(j if h is None else h)
        return cls("tiled", (0.0, 1.0, 0.0, 1.0), h=h, j=int(j), name=f"tiled(j={j},h={h:g})")

    @property
    def tiles(self):
        return 2 ** self.j if self.kind == "tiled" else 1

    # helpers ------------------------------------------------------------
    def _check(self, u, v):
        u0, u1, v0, v1 = self.domain
        if not self.periodic_u and (np.any(u < u0 - _EPS) or np.any(u > u1 + _EPS)):
            raise PointOutsideDomain("u outside the model domain")
        if not self.periodic_v and (np.any(v < v0 - _EPS) or np.any(v > v1 + _EPS)):
            raise PointOutsideDomain("v outside the model domain")

    def reduce(self, u, v):
        """Wrap periodic coordinates into the domain rectangle."""
        u0, u1, v0, v1 = self.domain
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.periodic_u:
            u = u0 + np.mod(u - u0, u1 - u0)
        if self.periodic_v:
            v = v0 + np.mod(v - v0, v1 - v0)
        return u, v

    def warp(self, u):
        return self.warping(u)

    def to_tile(self, x, y):
        """Tile indices and tile-local coordinates of points for the tiled kind."""
        n = self.tiles
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        l = np.clip(np.floor(n * x), 0, n - 1)
        m = np.clip(np.floor(n * y), 0, n - 1)
        return l, m, n * x - l, n * y - m

    def metric_tensor(self, u, v):
        """Matrix of ``g`` at ``(u, v)``; shape ``broadcast(u, v).shape + (2, 2)``."""
        u, v = self.reduce(u, v)
        self._check(u, v)
        shape = np.broadcast(u, v).shape
        if self.kind == "flat":
            return np.broadcast_to(np.eye(2), shape + (2, 2)).copy()
        if self.kind == "warped":
            G = np.zeros(shape + (2, 2))
            G[..., 0, 0] = 1.0
            G[..., 1, 1] = np.broadcast_to(self.warp(u), shape) ** 2
            return G
        if self.kind == "tiled":
            _, _, u, v = self.to_tile(u, v)
        J = block_inverse_jacobian(block_region(u, v), u, v, self.h)
        return np.einsum("...ki,...kj->...ij", J, J)

    def is_pole(self, u):
        u = np.asarray(u, dtype=float)
        u0, u1 = self.domain[:2]
        return (self.pole_u_min & (np.abs(u - u0) <= _EPS)) | (self.pole_u_max & (np.abs(u - u1) <= _EPS))

    def sqrt_det(self, u, v):
        u, v = self.reduce(u, v)
        self._check(u, v)
        shape = np.broadcast(u, v).shape
        if self.kind == "flat":
            return np.ones(shape)
        if self.kind == "warped":
            # zero at poles by continuity
            return np.broadcast_to(np.abs(self.warp(u)), shape).astype(float)
        if self.kind == "tiled":
            _, _, u, v = self.to_tile(u, v)
        J = block_inverse_jacobian(block_region(u, v), u, v, self.h)
        return np.abs(np.linalg.det(J))

    def eval_form(self, p, w):
        """Squared length ``g_p(w, w)``."""
        p = np.asarray(p, dtype=float)
        w = np.asarray(w, dtype=float)
        if self.kind == "warped" and np.any(self.is_pole(p[..., 0])):
            raise PoleEvaluationError("the form is degenerate at a pole")
        G = self.metric_tensor(p[..., 0], p[..., 1])
        return np.einsum("...i,...ij,...j->...", w, G, w)

    # block-only helpers -------------------------------------------------
    def _require_block(self):
        if self.kind != "block":
            raise ValueError("operation defined for the block kind only")

    def region_of(self, p):
        self._require_block()
        p = np.asarray(p, dtype=float)
        self._check(p[..., 0], p[..., 1])
        r = block_region(p[..., 0], p[..., 1])
        return BlockRegion(int(r)) if r.ndim == 0 else r

    def pullback(self, p):
        """Region and chart coordinates ``q`` with ``F_region(q) = p``."""
        self._require_block()
        p = np.asarray(p, dtype=float)
        self._check(p[..., 0], p[..., 1])
        r = block_region(p[..., 0], p[..., 1])
        s, t = block_inverse(r, p[..., 0], p[..., 1], self.h)
        if r.ndim == 0:
            return BlockRegion(int(r)), ParamPoint(float(s), float(t))
        return r, np.stack([s, t], axis=-1)


def eval_form(model: MetricModel, p, w):
    return model.eval_form(p, w)


def sqrt_det(model: MetricModel, p):
    p = np.asarray(p, dtype=float)
    if model.kind == "warped" and np.any(model.is_pole(p[..., 0])):
        return np.zeros(p.shape[:-1]) if p.ndim > 1 else 0.0
    out = model.sqrt_det(p[..., 0], p[..., 1])
    return float(out) if np.ndim(out) == 0 else out


def region_of(model: MetricModel, p):
    return model.region_of(p)


def pullback(model: MetricModel, p):
    return model.pullback(p)


_CONFIG_KEYS = {"family", "j", "eta", "h0", "h", "value", "a", "b", "periodic_u", "period", "name"}


def model_from_config(cfg: dict) -> MetricModel:
    """Build a model from ``{"family": ..., <numeric parameters>}``."""
    unknown = set(cfg) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown model keys: {sorted(unknown)}")
    fam = cfg.get("family")
    if fam == "flat":
        return MetricModel.flat()
    if fam == "block":
        return MetricModel.block(cfg["h"])
    if fam == "tiled":
        return MetricModel.tiled(int(cfg["j"]), cfg.get("h"))
    if fam == "constant":
        f = WarpingFunction.constant(cfg.get("value", 1.0), cfg.get("a", -1.0), cfg.get("b", 1.0))
    elif fam == "nonuniform":
        f = WarpingFunction.nonuniform(cfg["j"], cfg.get("eta", 0.5))
    elif fam in ("cusp", "cone"):
        j = cfg.get("j", math.inf)
        f = getattr(WarpingFunction, fam)(math.inf if j in (None, "inf") else float(j))
    elif fam == "cinch":
        f = WarpingFunction.cinch(cfg["j"], cfg.get("h0", 0.5))
    else:
        raise ValueError(f"unknown model family {fam!r}")
    return MetricModel.warped(
        f, period=cfg.get("period", TWO_PI), periodic_u=bool(cfg.get("periodic_u", False)),
        name=cfg.get("name", ""),
    )
