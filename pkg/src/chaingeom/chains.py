"""Chains of the homogeneous model G/P.

The chain through ``x = gP`` in a direction transverse to the contact
distribution is the projection of ``t -> u exp(tX)`` where ``X`` spans g_-2
and the frame ``u = g exp(Z)`` is corrected by the element ``Z`` of g_1 that
removes the g_-1 part of the direction.  Points of G/P for the lagrangean
algebra are flags (line in hyperplane) in R^{n+2}, and ``chart_coords`` gives
the affine big-cell coordinates of such a flag, centered at the base point.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares

from .graded_lie import AlgebraElement
from .parabolic_groups import (
    GroupElement,
    TOL,
    adjoint,
    exp_nilpotent,
    group_exp,
    in_p,
    solve_transversal,
)

CHART_TOL = 1e-12


class ChainError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FlagPoint:
    representative: GroupElement

    def same_point(self, other: "FlagPoint", tol: float = TOL) -> bool:
        return in_p(self.representative.inverse() @ other.representative, tol)


@dataclass(frozen=True, eq=False)
class ChainCurve:
    frame: GroupElement
    direction: AlgebraElement

    def point(self, t: float) -> FlagPoint:
        step = AlgebraElement(self.direction.algebra, tuple(t * c for c in self.direction.coords))
        return FlagPoint(self.frame @ group_exp(step))

    @cached_property
    def _float_data(self) -> Tuple[np.ndarray, np.ndarray]:
        x = np.asarray(self.direction.dense(), dtype=float)
        return self.frame.matrix, x

    @cached_property
    def _frame_inverse(self) -> np.ndarray:
        return np.linalg.inv(self.frame.matrix)

    def chart(self, t: float) -> np.ndarray:
        """Chart coordinates of the point at parameter ``t`` (float fast path)."""
        if self.frame.algebra.family != "lagrangean":
            raise ChainError("charts are implemented for the lagrangean model")
        frame, x = self._float_data
        return _chart_of_matrix(frame @ exp_nilpotent(t * x))


def _split_direction(xi: AlgebraElement) -> Tuple[AlgebraElement, AlgebraElement]:
    alg = xi.algebra
    grades = alg.grades
    if any(c for i, c in enumerate(xi.coords) if grades[i] >= 0):
        raise ChainError("direction must lie in g_-2 + g_-1")
    zero = xi.coords[0] * 0
    x2 = tuple(c if grades[i] == -2 else zero for i, c in enumerate(xi.coords))
    x1 = tuple(c if grades[i] == -1 else zero for i, c in enumerate(xi.coords))
    return AlgebraElement(alg, x2), AlgebraElement(alg, x1)


def chain_through(x: FlagPoint, xi: AlgebraElement) -> ChainCurve:
    """Chain through ``x`` in the direction represented by ``xi`` in the frame of x."""
    x2, x1 = _split_direction(xi)
    if x2.is_zero():
        raise ChainError("direction is tangent to the contact distribution")
    z = solve_transversal(x2, x1)
    return ChainCurve(x.representative @ group_exp(z), x2)


def tangent_direction(c: ChainCurve, x: FlagPoint) -> AlgebraElement:
    """Velocity of the chain at t = 0 in the frame of ``x``, as an element of g_-2 + g_-1.

    This is the g_- part of Ad(g^-1 u) X for the representative g of x and
    the chain frame u (exact when both are exact).
    """
    if not x.same_point(FlagPoint(c.frame)):
        raise ChainError("the chain does not start at this point")
    v = adjoint(x.representative.inverse() @ c.frame, c.direction)
    alg = v.algebra
    zero = v.coords[0] * 0
    return AlgebraElement(alg, tuple(a if alg.grades[i] < 0 else zero for i, a in enumerate(v.coords)))


def sample_chain(c: ChainCurve, ts: Sequence[float]) -> List[FlagPoint]:
    return [c.point(t) for t in ts]


def chart_coords(pt: FlagPoint) -> np.ndarray:
    """Big-cell coordinates (v_1..v_n, w_1..w_n, v_{n+1}) of a lagrangean flag.

    The line is spanned by ``(1, v_1, ..., v_{n+1})`` and the hyperplane is the
    kernel of ``(w_0, w_1, ..., w_n, 1)``; the base point is the origin.
    """
    g = pt.representative
    if g.algebra.family != "lagrangean":
        raise ChainError("charts are implemented for the lagrangean model")
    return _chart_of_matrix(g.ambient())


def _chart_of_matrix(m: np.ndarray) -> np.ndarray:
    line = m[:, 0]
    form = np.linalg.inv(m)[-1, :]
    if abs(line[0]) <= CHART_TOL * np.linalg.norm(line) or abs(form[-1]) <= CHART_TOL * np.linalg.norm(form):
        raise ChainError("point lies outside the chart")
    v = line / line[0]
    w = form / form[-1]
    return np.concatenate([v[1:-1], w[1:-1], v[-1:]])


def chart_curve(c: ChainCurve, ts: Sequence[float]) -> np.ndarray:
    return np.array([c.chart(float(t)) for t in ts])


# -- comparing unparametrized curves ------------------------------------------------
#
# Chart coordinates blow up where a curve leaves the big cell, so distances
# are measured on the flags themselves: a flag is the pair (unit vector on
# its line, unit covector of its hyperplane), compared up to the sign of
# each factor.  This metric is bounded and continuous on all of G/P.  Curves
# are parametrized by theta with t = tan(theta), which closes each chain up
# through its point at t = infinity.


def _flag_of(m: np.ndarray, inv: np.ndarray) -> np.ndarray:
    line, form = m[:, 0], inv[-1, :]
    return np.concatenate([line / np.linalg.norm(line), form / np.linalg.norm(form)])


def _flag_vector(curve: ChainCurve, theta: float) -> np.ndarray:
    if curve.frame.algebra.family != "lagrangean":
        raise ChainError("curve comparison is implemented for the lagrangean model")
    frame, x = curve._float_data
    t = np.tan(theta)
    return _flag_of(frame @ exp_nilpotent(t * x), exp_nilpotent(-t * x) @ curve._frame_inverse)


def _aligned_difference(f: np.ndarray, p: np.ndarray) -> np.ndarray:
    h = len(f) // 2
    out = []
    for a, b in ((f[:h], p[:h]), (f[h:], p[h:])):
        out.append((a if a @ b >= 0 else -a) - b)
    return np.concatenate(out)


def flag_distance(a: FlagPoint, b: FlagPoint) -> float:
    """Distance of two lagrangean flags in the sign-invariant flag metric."""
    fs = []
    for x in (a, b):
        if x.representative.algebra.family != "lagrangean":
            raise ChainError("flag distance is implemented for the lagrangean model")
        m = x.representative.matrix
        fs.append(_flag_of(m, np.linalg.inv(m)))
    return float(np.linalg.norm(_aligned_difference(*fs)))


def _refine(point: np.ndarray, curve: ChainCurve, th0: float, d0: float, bounds) -> Tuple[float, float]:
    def residual(th):
        return _aligned_difference(_flag_vector(curve, float(th[0])), point)

    res = least_squares(residual, [th0], bounds=bounds, xtol=1e-15, ftol=1e-15, gtol=1e-15)
    d = float(np.linalg.norm(res.fun))
    return (d, float(res.x[0])) if d <= d0 else (d0, th0)


def _grid_best(point: np.ndarray, curve: ChainCurve, thetas) -> Tuple[float, float]:
    dists = [np.linalg.norm(_aligned_difference(_flag_vector(curve, float(th)), point)) for th in thetas]
    k = int(np.argmin(dists))
    return float(dists[k]), float(thetas[k])


def _project(point: np.ndarray, curve: ChainCurve, lo: float, hi: float, grid: int = 64) -> Tuple[float, float]:
    """Closest point of ``curve`` with theta in ``[lo, hi]``: (distance, theta).

    A grid search picks the starting parameter, then the flag residual is
    minimized as a smooth least-squares problem in theta.
    """
    d, th = _grid_best(point, curve, np.linspace(lo, hi, grid))
    return _refine(point, curve, th, d, ([lo], [hi]))


def _project_global(point: np.ndarray, curve: ChainCurve, grid: int = 2001) -> Tuple[float, float]:
    """Closest point over the whole closed curve; theta is defined modulo pi."""
    thetas = np.linspace(-np.pi / 2, np.pi / 2, grid, endpoint=False)
    d, th = _grid_best(point, curve, thetas)
    return _refine(point, curve, th, d, ([-np.inf], [np.inf]))


def _matched_arc(s0: float, s1: float, sm: float) -> Tuple[float, float]:
    """The arc of the theta circle (period pi) from s0 to s1 that contains sm."""
    length = (s1 - s0) % np.pi
    if (sm - s0) % np.pi <= length:
        return s0, s0 + length
    return s0 + length - np.pi, s0


def _arc_distance(a: ChainCurve, b: ChainCurve, t_range: Tuple[float, float], samples: int) -> float:
    th_b = np.arctan(np.linspace(t_range[0], t_range[1], samples))
    pb = [_flag_vector(b, th) for th in th_b]
    s0 = _project_global(pb[0], a)[1]
    s1 = _project_global(pb[-1], a)[1]
    sm = _project_global(pb[samples // 2], a)[1]
    lo, hi = _matched_arc(s0, s1, sm)
    pad = 1e-3 * (hi - lo) + 1e-9
    d_ba = max(_project(p, a, lo - pad, hi + pad)[0] for p in pb)
    pa = [_flag_vector(a, th) for th in np.linspace(lo, hi, samples)]
    pad = 1e-3 * (th_b[-1] - th_b[0])
    d_ab = max(_project(p, b, th_b[0] - pad, th_b[-1] + pad)[0] for p in pa)
    return max(d_ab, d_ba)


def hausdorff_distance(a: ChainCurve, b: ChainCurve, t_range: Tuple[float, float] = (-1.0, 1.0), samples: int = 41) -> float:
    """Symmetric Hausdorff distance between corresponding arcs of two chains.

    The arc of ``b`` over ``t_range`` is compared with the arc of ``a``
    between the projections of its endpoints (the one containing the
    projection of its midpoint), in the flag metric described above.
    """
    if not t_range[0] < t_range[1]:
        raise ChainError("empty parameter window")
    return _arc_distance(a, b, t_range, samples)


# -- export ---------------------------------------------------------------------------


def write_csv(path: str, ts: Sequence[float], coords: np.ndarray) -> None:
    dim = coords.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"x{i + 1}" for i in range(dim)])
        for t, row in zip(ts, coords):
            writer.writerow(["%.17g" % t] + ["%.17g" % v for v in row])


def manifest(c: ChainCurve, ts: Sequence[float], direction: Sequence) -> dict:
    n = c.frame.algebra.ambient_size - 2
    return {
        "n": n,
        "frame": [["%.17g" % v for v in row] for row in c.frame.ambient()],
        "direction": [str(v) for v in direction],
        "t_range": [float(ts[0]), float(ts[-1])] if len(ts) else [],
        "samples": len(ts),
    }


def write_manifest(path: str, data: dict) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2)


def direction_from_coords(alg, values: Sequence) -> AlgebraElement:
    """Element of g_-2 + g_-1 from its coordinates (g_-2 first, then g_-1)."""
    idx = alg.grade_indices(-2, -1)
    if len(values) != len(idx):
        raise ChainError(f"expected {len(idx)} direction coordinates, got {len(values)}")
    coords = [Fraction(0)] * alg.dim
    for i, v in zip(idx, values):
        coords[i] = Fraction(v)
    return AlgebraElement(alg, tuple(coords))


def base_point(alg) -> FlagPoint:
    return FlagPoint(GroupElement.identity(alg))
