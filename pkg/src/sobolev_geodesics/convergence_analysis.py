"""Comparison functionals between distance functions on a common sample set."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geodesic_engine import DistanceMatrix


class SampleMismatch(ValueError):
    pass


class DegenerateBackground(ValueError):
    pass


@dataclass(frozen=True)
class DistanceModel:
    """A distance given in closed form.

    ``kind`` is ``taxi`` (on the unit square), ``power`` with exponent ``1/j``
    (on ``[0, 1]``), ``discrete`` (1 between distinct points) or ``matrix``.
    """

    kind: str
    j: int = 1
    matrix: DistanceMatrix | None = None

    def __post_init__(self):
        if self.kind not in ("taxi", "power", "discrete", "matrix"):
            raise ValueError(f"unknown distance model {self.kind!r}")
        if self.kind == "power" and self.j < 1:
            raise ValueError("power exponent index j must be >= 1")
        if self.kind == "matrix" and self.matrix is None:
            raise ValueError("matrix kind needs a DistanceMatrix")

    def __call__(self, p, q):
        return eval_distance_model(self, p, q)

    def on(self, samples, name=None):
        """Pairwise matrix of this model over ``samples``."""
        pts = np.asarray(samples, dtype=float)
        if self.kind == "matrix":
            if not np.array_equal(pts, self.matrix.points):
                raise SampleMismatch("matrix model is tied to its own samples")
            return self.matrix
        if self.kind != "taxi" and pts.ndim == 2 and pts.shape[1] == 1:
            pts = pts[:, 0]
        P, Q = pts[:, None], pts[None, :]
        D = eval_distance_model(self, P, Q)
        return DistanceMatrix(pts, D, {"model": name or self.label})

    @property
    def label(self):
        return f"power(j={self.j})" if self.kind == "power" else self.kind


def _check_box(x, lo=0.0, hi=1.0):
    if np.any(x < lo - 1e-12) or np.any(x > hi + 1e-12):
        raise ValueError("point outside the unit domain")


def eval_distance_model(D: DistanceModel, p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if D.kind == "taxi":
        _check_box(p)
        _check_box(q)
        out = np.abs(p[..., 0] - q[..., 0]) + np.abs(p[..., 1] - q[..., 1])
    elif D.kind == "matrix":
        pts = D.matrix.points
        i = int(np.argmin(np.abs(pts - p).reshape(len(pts), -1).sum(axis=1)))
        k = int(np.argmin(np.abs(pts - q).reshape(len(pts), -1).sum(axis=1)))
        return float(D.matrix.values[i, k])
    else:
        _check_box(p)
        _check_box(q)
        diff = np.abs(p - q)
        if D.kind == "power":
            out = diff ** (1.0 / D.j)
        else:
            out = (diff > 0).astype(float)
    return float(out) if np.ndim(out) == 0 else out


def _same_samples(D1: DistanceMatrix, D2: DistanceMatrix):
    if D1.points.shape != D2.points.shape or not np.allclose(D1.points, D2.points, rtol=0, atol=1e-12):
        raise SampleMismatch("distance matrices are over different sample sets")


def uniform_distance(D1: DistanceMatrix, D2: DistanceMatrix) -> float:
    """``max |d1 - d2|`` over all sampled pairs."""
    _same_samples(D1, D2)
    return float(np.max(np.abs(D1.values - D2.values)))


def gh_upper_bound(D1: DistanceMatrix, D2: DistanceMatrix) -> float:
    """Gromov-Hausdorff upper bound from the identity correspondence."""
    return 0.5 * uniform_distance(D1, D2)


@dataclass(frozen=True)
class HolderFit:
    alpha: float
    lambda_hat: float
    c_hat: float
    argmax: tuple
    argmin: tuple

    def certifies(self, D_j, D_0, rtol=1e-12) -> bool:
        """True if ``c_hat d0 <= dj <= lambda_hat d0**alpha`` on every sampled pair.

        Both sides are compared up to ``rtol`` to absorb rounding in the ratios.
        """
        i, k = np.triu_indices(len(D_0), 1)
        d0 = D_0.values[i, k]
        dj = D_j.values[i, k]
        lower = self.c_hat * d0 <= dj * (1 + rtol)
        upper = dj <= self.lambda_hat * d0**self.alpha * (1 + rtol)
        return bool(np.all(lower) and np.all(upper))


def fit_holder(D_j: DistanceMatrix, D_0: DistanceMatrix, alpha: float) -> HolderFit:
    """Sample lower bound of the Hölder constant and lower Lipschitz constant.

    ``lambda_hat`` is the largest ``d_j / d_0**alpha`` and ``c_hat`` the
    smallest ``d_j / d_0`` over distinct sampled pairs.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    _same_samples(D_j, D_0)
    i, k = np.triu_indices(len(D_0), 1)
    if len(i) == 0:
        raise ValueError("need at least two samples")
    d0 = D_0.values[i, k]
    if np.any(d0 <= 0):
        raise DegenerateBackground("distinct samples at zero background distance")
    dj = D_j.values[i, k]
    upper = dj / d0**alpha
    lower = dj / d0
    a, b = int(np.argmax(upper)), int(np.argmin(lower))
    return HolderFit(
        float(alpha),
        float(upper[a]),
        float(lower[b]),
        (int(i[a]), int(k[a])),
        (int(i[b]), int(k[b])),
    )


@dataclass
class ConvergenceTable:
    """Per-pair deviations ``|d_j - d_ref|`` along a sequence.

    ``deviations[s, p]`` belongs to step ``s`` and pair ``pairs[p]``.
    """

    steps: list
    pairs: np.ndarray
    deviations: np.ndarray
    monotone_tail: np.ndarray
    sup: np.ndarray

    def rows(self):
        for s, step in enumerate(self.steps):
            yield step, float(self.sup[s])


def pointwise_convergence_report(sequence, reference: DistanceMatrix, steps=None, tail=3):
    """Tabulate pointwise and uniform deviation of ``sequence`` from ``reference``.

    A pair's ``monotone_tail`` flag is set when its deviations over the last
    ``tail`` steps never increase.
    """
    sequence = list(sequence)
    steps = list(range(1, len(sequence) + 1)) if steps is None else list(steps)
    for D in sequence:
        _same_samples(D, reference)
    i, k = np.triu_indices(len(reference), 1)
    dev = np.array([np.abs(D.values[i, k] - reference.values[i, k]) for D in sequence])
    last = dev[-tail:]
    mono = np.all(np.diff(last, axis=0) <= 0, axis=0) if len(last) > 1 else np.ones(len(i), bool)
    sup = dev.max(axis=1) if dev.shape[1] else np.zeros(len(sequence))
    return ConvergenceTable(steps, np.stack([i, k], axis=1), dev, mono, sup)
