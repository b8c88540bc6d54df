"""Closed-form reference quantities for the named experiments."""

from __future__ import annotations

import math

SQRT2 = math.sqrt(2.0)


def nonuniform_curve_length(j, eta):
    """Length of the plateau segment joining ``p_j`` and ``q_j``."""
    return math.sqrt(j ** (2 * eta) + 2 * j**eta + 5) / (8 * j**2)


def nonuniform_background_distance(j):
    return math.sqrt(5) / (8 * j**2)


def nonuniform_ratio(j, eta):
    return math.sqrt(j ** (2 * eta) + 2 * j**eta + 5) / math.sqrt(5)


def nonuniform_holder_ratio(j, eta):
    return nonuniform_ratio(j, eta) / j**eta


def nonuniform_volume_estimate(j, eta):
    return 4 * math.pi * (j**eta + 1) / j + 4 * math.pi * (1 - 1 / j)


def nonuniform_points(j):
    """The pair ``(p_j, q_j)`` straddling the plateau."""
    a = 1.0 / (8 * j**2)
    return (-a, 0.0), (a, a)


def block_volume(h):
    return 1 + 4 * h


def block_hausdorff_bound(h):
    return h + SQRT2


def tile_volume(j, h):
    return (1 + 4 * h) / 4**j


def tiled_delta(j, h):
    return (h + SQRT2 + 1) / 2**j


def boundary_path_length(p, q):
    """Distance along the boundary of the unit square between two boundary points."""

    def arc(pt):
        x, y = pt
        if abs(y) < 1e-12:
            return x
        if abs(x - 1) < 1e-12:
            return 1 + y
        if abs(y - 1) < 1e-12:
            return 3 - x
        return 4 - y

    d = abs(arc(p) - arc(q))
    return min(d, 4 - d)


def _lattice_exits(p, n):
    """Lattice vertices bounding the grid-line segment through ``p``, with the walk to each."""
    x, y = p[0] * n, p[1] * n
    rx, ry = round(x), round(y)
    on_v, on_h = abs(x - rx) < 1e-9, abs(y - ry) < 1e-9
    if on_v and on_h:
        return [((rx, ry), 0.0)]
    if on_v:
        lo, hi = math.floor(y), math.ceil(y)
        return [((rx, lo), (y - lo) / n), ((rx, hi), (hi - y) / n)]
    if on_h:
        lo, hi = math.floor(x), math.ceil(x)
        return [((lo, ry), (x - lo) / n), ((hi, ry), (hi - x) / n)]
    raise ValueError("point is not on the tile grid")


def lattice_path_length(p, q, n):
    """Shortest Euclidean length of a path inside the grid of ``1/n``-tiles joining ``p`` to ``q``.

    Equals the taxi distance whenever both points are lattice vertices or lie on
    a common grid line, and exceeds it by at most ``1/n`` otherwise.
    """
    ep, eq = _lattice_exits(p, n), _lattice_exits(q, n)
    best = math.inf
    for (a, da) in ep:
        for (b, db) in eq:
            best = min(best, da + db + (abs(a[0] - b[0]) + abs(a[1] - b[1])) / n)
    # both on the same open segment
    if len(ep) == 2 and {v for v, _ in ep} == {v for v, _ in eq}:
        best = min(best, abs(p[0] - q[0]) + abs(p[1] - q[1]))
    return best


def holder_kink(j, h):
    return tiled_delta(j, h) / h


_TABLES = {
    "nonuniform": lambda j, eta=0.5, **_: {
        "L(C_j)": nonuniform_curve_length(j, eta),
        "d_inf(p_j,q_j)": nonuniform_background_distance(j),
        "lipschitz ratio": nonuniform_ratio(j, eta),
        "holder ratio": nonuniform_holder_ratio(j, eta),
        "volume estimate": nonuniform_volume_estimate(j, eta),
        "volume bound": 16 * math.pi,
    },
    "blocks": lambda h, **_: {
        "volume": block_volume(h),
        "hausdorff bound": block_hausdorff_bound(h),
        "boundary diameter": 2.0,
    },
    "tiled": lambda j, h=None, **_: {
        "tile volume": tile_volume(j, j if h is None else h),
        "volume": block_volume(j if h is None else h),
        "delta_j": tiled_delta(j, j if h is None else h),
        "diameter bound": 2 + tiled_delta(j, j if h is None else h),
    },
    "power-holder": lambda j, n=64, **_: {
        "sup deviation": 1 - (1.0 / (n - 1)) ** (1.0 / j),
    },
    "cone": lambda **_: {"pole density": 2.0},
    "cinch": lambda h0=0.5, **_: {"waist distance": h0 * math.pi},
    "flat-check": lambda **_: {"volume": 1.0, "disk density": math.pi},
}


def reference_values(name, **params):
    """Closed-form values for experiment ``name`` at the given parameters."""
    try:
        table = _TABLES[name]
    except KeyError:
        raise KeyError(f"no closed forms for experiment {name!r}") from None
    return table(**params)
