"""The symmetrized cubic tensor of a contact fiber and its inversion.

A fiber is a vector space R^{2n} with a nondegenerate antisymmetric form
``levi`` and either a product structure (``kind="product"``, an involution
whose eigenspaces L and R are levi-isotropic) or a complex structure
(``kind="complex"``, J^2 = -1 and levi J-invariant).  ``build_s`` forms the
complete symmetrization S of ``(x, y, z) -> levi(x, K y) K z`` where K is the
structure operator.  The nonzero vectors x with S(x,x,x) = 0 and S(x,x,y)
parallel to x for some y are exactly the eigenvectors of K, which is what
the reconstruction routines solve for.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import subspace_angles
from scipy.optimize import least_squares

MEMBER_TOL = 1e-9


class FiberError(ValueError):
    pass


class ReconstructionError(RuntimeError):
    def __init__(self, message: str, diagnostics: Optional[dict] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


def _is_exact(a: np.ndarray) -> bool:
    return a.dtype == object


def _close(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    if _is_exact(a) and _is_exact(b):
        return not np.any(a - b != 0)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b), initial=0.0)) <= tol * max(1.0, float(np.max(np.abs(a)))) * max(1.0, float(np.max(np.abs(b))))


@dataclass(frozen=True, eq=False)
class ContactFiber:
    levi: np.ndarray
    structure: np.ndarray
    kind: str  # "product" or "complex"

    def __post_init__(self):
        self.validate()

    @property
    def dim(self) -> int:
        return self.levi.shape[0]

    @property
    def n(self) -> int:
        return self.dim // 2

    def validate(self, tol: float = 1e-9) -> None:
        lv, k = self.levi, self.structure
        d = lv.shape[0]
        if lv.shape != (d, d) or k.shape != (d, d) or d % 2 or d == 0:
            raise FiberError("levi and structure must be square of the same even size")
        if not _close(lv, -lv.T, tol):
            raise FiberError("levi form is not antisymmetric")
        if abs(np.linalg.det(np.asarray(lv, dtype=float))) <= tol:
            raise FiberError("levi form is degenerate")
        ident = np.eye(d, dtype=int)
        if self.kind == "product":
            if not _close(k.dot(k), ident.astype(k.dtype), tol):
                raise FiberError("product structure must square to the identity")
            tr = k.trace()
            if abs(float(tr)) > tol:
                raise FiberError("eigenspaces of the product structure must have equal dimension")
            # isotropic eigenspaces: levi(Kx, Ky) = -levi(x, y)
            if not _close(k.T.dot(lv).dot(k), -lv, tol):
                raise FiberError("eigenspaces of the product structure are not levi-isotropic")
        elif self.kind == "complex":
            if not _close(k.dot(k), -ident.astype(k.dtype), tol):
                raise FiberError("complex structure must square to minus the identity")
            if not _close(k.T.dot(lv).dot(k), lv, tol):
                raise FiberError("levi form is not invariant under the complex structure")
        else:
            raise FiberError(f"unknown structure kind {self.kind!r}")


@dataclass(frozen=True, eq=False)
class CubicTensor:
    """``coeffs[i, j, k, l]`` is the l-th component of S(e_i, e_j, e_k)."""

    coeffs: np.ndarray

    @property
    def dim(self) -> int:
        return self.coeffs.shape[0]

    def __call__(self, x, y, z) -> np.ndarray:
        t = np.tensordot(x, self.coeffs, axes=(0, 0))
        t = np.tensordot(y, t, axes=(0, 0))
        return np.tensordot(z, t, axes=(0, 0))

    def is_symmetric(self, tol: float = 0.0) -> bool:
        c = self.coeffs
        for perm in itertools.permutations(range(3)):
            other = np.transpose(c, perm + (3,))
            if _is_exact(c):
                if np.any(other - c != 0):
                    return False
            elif np.max(np.abs(other - c)) > tol:
                return False
        return True

    def norm(self) -> float:
        return float(np.linalg.norm(np.asarray(self.coeffs, dtype=float)))

    def to_float(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)


def build_s(f: ContactFiber) -> CubicTensor:
    """Average over the six permutations of levi(x, K y) K z (exact on object arrays)."""
    f.validate()
    k = f.structure
    b = f.levi.dot(k)
    # t[i, j, k, l] = b(e_i, e_j) (K e_k)_l
    t = b[:, :, None, None] * k.T[None, None, :, :]
    total = sum(np.transpose(t, p + (3,)) for p in itertools.permutations(range(3)))
    six = Fraction(6) if _is_exact(total) else 6.0
    return CubicTensor(total / six)


# -- membership --------------------------------------------------------------------------


def _norm(v) -> float:
    return float(np.linalg.norm(v))


def _off_line(v: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Component of ``v`` orthogonal to the (complex) line through ``xi``."""
    u = xi / _norm(xi)
    return v - np.vdot(u, v) * u


def membership(s: CubicTensor, xi, probes: Sequence, tol: float = MEMBER_TOL) -> bool:
    """Whether S(xi,xi,xi) = 0 and some probe y gives S(xi,xi,y) a nonzero multiple of xi.

    Tolerances are relative to the norms of S, xi and the probe, so the test
    is invariant under rescaling any of them.  Complex vectors are allowed
    (S is extended complex-trilinearly).
    """
    if not len(probes):
        raise ValueError("membership needs at least one probe vector")
    xi = np.asarray(xi)
    nx = _norm(xi)
    if nx == 0:
        raise ValueError("xi must be nonzero")
    c = s.to_float()
    ns = s.norm()
    if ns == 0:
        return False
    s_f = CubicTensor(c)
    if _norm(s_f(xi, xi, xi)) > tol * ns * nx ** 3:
        return False
    for eta in probes:
        eta = np.asarray(eta)
        v = s_f(xi, xi, eta)
        nv = _norm(v)
        if nv > tol * ns * nx ** 2 * _norm(eta) and _norm(_off_line(v, xi)) <= tol * nv:
            return True
    return False


def default_probes(dim: int, rng: Optional[np.random.Generator] = None, count: int = 3) -> List[np.ndarray]:
    rng = rng or np.random.default_rng(0)
    return list(np.eye(dim)) + [rng.normal(size=dim) for _ in range(count)]


# -- solving for the eigenvector locus --------------------------------------------------


def _off_lines(m: np.ndarray, xi: np.ndarray) -> np.ndarray:
    u = xi / _norm(xi)
    return m - np.outer(m @ u.conj(), u)


def _residual_real(c: np.ndarray):
    # every basis vector is used as a probe: with a single probe y the points
    # where S(x,x,y) vanishes outright would also solve the system
    def fun(x):
        m = np.tensordot(x, np.tensordot(x, c, axes=(0, 0)), axes=(0, 0))
        cube = m.T @ x
        side = _off_lines(m, x) if _norm(x) else m
        return np.concatenate([cube, side.ravel(), [x @ x - 1.0]])

    return fun


def _residual_complex(c: np.ndarray):
    d = c.shape[0]

    def fun(w):
        x = w[:d] + 1j * w[d:]
        m = np.tensordot(x, np.tensordot(x, c, axes=(0, 0)), axes=(0, 0))
        cube = m.T @ x
        side = (_off_lines(m, x) if _norm(x) else m).ravel()
        # the phase of x stays free; the solver copes with the flat direction
        return np.concatenate([cube.real, cube.imag, side.real, side.imag, [np.vdot(x, x).real - 1.0]])

    return fun


def _member_sum(c: CubicTensor, u: np.ndarray, v: np.ndarray, probes, tol: float) -> bool:
    """Whether ``u`` and ``v`` lie in the same eigenspace (tested on two combinations)."""
    return membership(c, u + v, probes, tol) and membership(c, u - 0.5 * v, probes, tol)


def _cluster(c: CubicTensor, sols: List[np.ndarray], probes, tol: float) -> List[List[np.ndarray]]:
    clusters: List[List[np.ndarray]] = []
    for v in sols:
        for cl in clusters:
            if _member_sum(c, cl[0], v, probes, tol):
                cl.append(v)
                break
        else:
            clusters.append([v])
    return clusters


def _span(vectors: List[np.ndarray], tol: float = 1e-6) -> np.ndarray:
    """Orthonormal basis of the numerical span of ``vectors``."""
    a = np.array(vectors).T
    u, sv, _ = np.linalg.svd(a, full_matrices=False)
    r = int(np.sum(sv > tol * sv[0]))
    return u[:, :r]


def _deflated(fun, spaces: List[np.ndarray], d: int, complex_: bool):
    def wrapped(w):
        x = w[:d] + 1j * w[d:] if complex_ else w
        nx = _norm(x) or 1.0
        factor = 1.0
        for q in spaces:
            off = _norm(x - q @ (q.conj().T @ x)) / nx
            factor *= 1.0 + 1.0 / max(off, 1e-12) ** 2
        return fun(w) * factor

    return wrapped


def _solve_locus(s: CubicTensor, complex_: bool, seed: int, max_starts: int, tol: float, info: Optional[dict]):
    ns = s.norm()
    if ns == 0:
        raise ReconstructionError("degenerate tensor: S = 0")
    c = s.to_float() / ns
    s_unit = CubicTensor(c)
    d = s.dim
    n = d // 2
    rng = np.random.default_rng(seed)
    probes = default_probes(d, rng)
    fun = _residual_complex(c) if complex_ else _residual_real(c)
    found: List[np.ndarray] = []
    clusters: List[List[np.ndarray]] = []
    starts = 0
    worst = 0.0
    while starts < max_starts:
        if starts >= 25 and not found:
            # nothing on the locus at all: wrong structure class
            break
        starts += 1
        x0 = rng.normal(size=2 * d if complex_ else d)
        x0 /= np.linalg.norm(x0)
        full = [_span(cl) for cl in clusters if _span(cl).shape[1] >= n]
        if full:
            # deflation: keep the solver away from eigenspaces already found
            res = least_squares(_deflated(fun, full, d, complex_), x0, method="lm", max_nfev=2000)
            x0 = res.x
        res = least_squares(fun, x0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
        x = res.x[:d] + 1j * res.x[d:] if complex_ else res.x
        if not _norm(x) or not membership(s_unit, x, probes, tol):
            continue
        worst = max(worst, float(np.linalg.norm(res.fun)))
        found.append(x / _norm(x))
        clusters = _cluster(s_unit, found, probes, tol)
        full = [cl for cl in clusters if _span(cl).shape[1] >= n]
        if complex_ and full:
            break
        if not complex_ and len(full) >= 2:
            break
    diagnostics = {
        "starts": starts,
        "solutions": len(found),
        "cluster_ranks": [_span(cl).shape[1] for cl in clusters],
        "max_residual": worst,
    }
    if info is not None:
        info.update(diagnostics)
    return clusters, diagnostics


def _cubic_roots_n1(s: CubicTensor, tol: float) -> List[np.ndarray]:
    """Real lines in R^2 where S(x,x,x) = 0, from the cubic in the affine parameter."""
    c = s.to_float() / s.norm()
    e1, e2 = np.eye(2)
    s_f = CubicTensor(c)
    # S(e1 + y e2)^3 = a0 + 3 a1 y + 3 a2 y^2 + a3 y^3 by symmetry
    a0, a1, a2, a3 = s_f(e1, e1, e1), s_f(e1, e1, e2), s_f(e1, e2, e2), s_f(e2, e2, e2)
    cands = []
    for comp in range(2):
        coeffs = [a3[comp], 3 * a2[comp], 3 * a1[comp], a0[comp]]
        if max(abs(v) for v in coeffs) <= tol:
            continue
        for r in np.roots(coeffs):
            if abs(r.imag) <= 1e-7 * max(1.0, abs(r)):
                cands.append(np.array([1.0, r.real]))
    if _norm(a3) <= tol:
        cands.append(e2.copy())
    # polish on the quadric cone with a few Newton steps on the first equation
    fun = _residual_real(c)
    out = []
    for v in cands:
        v = v / _norm(v)
        res = least_squares(fun, v, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
        out.append(res.x / _norm(res.x))
    return out


def reconstruct_lagrangean(s: CubicTensor, seed: int = 0, max_starts: int = 200, tol: float = MEMBER_TOL, info: Optional[dict] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Recover the pair of eigenspaces {L, R} of a product-type fiber from S.

    Returns two orthonormal ``2n x n`` bases in no particular order.
    """
    if s.norm() == 0:
        raise ReconstructionError("degenerate tensor: S = 0")
    d = s.dim
    n = d // 2
    if n == 1:
        s_unit = CubicTensor(s.to_float() / s.norm())
        probes = default_probes(2)
        sols = [v for v in _cubic_roots_n1(s, tol) if membership(s_unit, v, probes, tol)]
        clusters = _cluster(s_unit, sols, probes, tol)
        diagnostics = {"starts": 0, "solutions": len(sols), "cluster_ranks": [_span(c).shape[1] for c in clusters]}
        if info is not None:
            info.update(diagnostics)
    else:
        clusters, diagnostics = _solve_locus(s, False, seed, max_starts, tol, info)
    spans = [_span(cl) for cl in clusters]
    full = [sp for sp in spans if sp.shape[1] == n]
    if len(full) != 2 or any(sp.shape[1] > n for sp in spans):
        raise ReconstructionError("could not find two n-dimensional eigenspaces", diagnostics)
    return full[0], full[1]


def reconstruct_cr(s: CubicTensor, seed: int = 0, max_starts: int = 200, tol: float = MEMBER_TOL, info: Optional[dict] = None) -> np.ndarray:
    """Recover the complex structure J (up to sign) of a complex-type fiber from S.

    The locus is searched in the complexification, where it is the union of
    the two eigenspaces of J; one of them, V, gives
    ``J = [V, conj V] diag(i, -i) [V, conj V]^{-1}``.
    """
    clusters, diagnostics = _solve_locus(s, True, seed, max_starts, tol, info)
    n = s.dim // 2
    full = [_span(cl) for cl in clusters if _span(cl).shape[1] == n]
    if not full:
        raise ReconstructionError("could not find an n-dimensional complex eigenspace", diagnostics)
    v = full[0]
    basis = np.hstack([v, v.conj()])
    sv = np.linalg.svd(basis, compute_uv=False)
    if sv[-1] <= 1e-6 * sv[0]:
        raise ReconstructionError("eigenspace is real: the tensor is not of complex type", diagnostics)
    j = basis @ np.diag([1j] * n + [-1j] * n) @ np.linalg.inv(basis)
    if np.max(np.abs(j.imag)) > 1e-6 * max(1.0, np.max(np.abs(j.real))):
        raise ReconstructionError("reconstructed operator is not real", diagnostics)
    return j.real


# -- random fibers and round trips ------------------------------------------------------


def _random_frame(n: int, rng: np.random.Generator, scale: float) -> np.ndarray:
    t = np.eye(2 * n) + scale * rng.normal(size=(2 * n, 2 * n))
    while abs(np.linalg.det(t)) < 0.1:
        t = np.eye(2 * n) + scale * rng.normal(size=(2 * n, 2 * n))
    return t


def standard_fiber(kind: str, n: int, signature: Optional[Tuple[int, int]] = None) -> ContactFiber:
    """Exact standard fiber: levi = [[0, D], [-D, 0]] with K = diag(I, -I) or [[0, -I], [I, 0]]."""
    one, zero = Fraction(1), Fraction(0)
    ident = np.array([[one if i == j else zero for j in range(n)] for i in range(n)], dtype=object)
    z = ident * 0
    if kind == "product":
        d = ident
        k = np.block([[ident, z], [z, -ident]])
    elif kind == "complex":
        p, q = signature if signature is not None else (n, 0)
        if p + q != n or p < 0 or q < 0:
            raise FiberError("signature must split n")
        d = np.array([[(one if i < p else -one) if i == j else zero for j in range(n)] for i in range(n)], dtype=object)
        k = np.block([[z, -ident], [ident, z]])
    else:
        raise FiberError(f"unknown structure kind {kind!r}")
    levi = np.block([[z, d], [-d, z]])
    return ContactFiber(levi, k, kind)


def transform_fiber(f: ContactFiber, t: np.ndarray) -> ContactFiber:
    """Push a fiber forward by the linear map ``t``."""
    t = np.asarray(t, dtype=float)
    ti = np.linalg.inv(t)
    lv = ti.T @ np.asarray(f.levi, dtype=float) @ ti
    k = t @ np.asarray(f.structure, dtype=float) @ ti
    return ContactFiber(lv, k, f.kind)


def random_fiber(kind: str, n: int, rng: np.random.Generator, scale: float = 0.5) -> Tuple[ContactFiber, np.ndarray]:
    """Random fiber of the given kind, with the frame ``t`` used to produce it."""
    sig = None
    if kind == "complex":
        p = int(rng.integers(0, n + 1))
        sig = (p, n - p)
    t = _random_frame(n, rng, scale)
    return transform_fiber(standard_fiber(kind, n, sig), t), t


def eigenspaces(f: ContactFiber) -> Tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases of the +1 and -1 eigenspaces of a product structure."""
    k = np.asarray(f.structure, dtype=float)
    d = k.shape[0]
    plus = _span(list((np.eye(d) + k).T), 1e-9)
    minus = _span(list((np.eye(d) - k).T), 1e-9)
    return plus, minus


def pair_angle_error(found: Tuple[np.ndarray, np.ndarray], true: Tuple[np.ndarray, np.ndarray]) -> float:
    """Largest principal angle after matching the unordered pairs."""
    def worst(a, b):
        return float(np.max(subspace_angles(a, b)))

    straight = max(worst(found[0], true[0]), worst(found[1], true[1]))
    swapped = max(worst(found[0], true[1]), worst(found[1], true[0]))
    return min(straight, swapped)


def sign_error(j_found: np.ndarray, j_true: np.ndarray) -> float:
    """Relative distance from ``j_found`` to the nearer of +J and -J."""
    j_true = np.asarray(j_true, dtype=float)
    scale = np.linalg.norm(j_true)
    return float(min(np.linalg.norm(j_found - j_true), np.linalg.norm(j_found + j_true)) / scale)


def round_trip(kind: str, n: int, fiber_seed: int, solver_seed: int = 0) -> dict:
    """Build S from a random fiber, reconstruct, and report the errors."""
    rng = np.random.default_rng(fiber_seed)
    f, _ = random_fiber(kind, n, rng)
    s = build_s(f)
    info: dict = {}
    report = {"kind": kind, "n": n, "fiber_seed": fiber_seed}
    if kind == "product":
        found = reconstruct_lagrangean(s, seed=solver_seed, info=info)
        true = eigenspaces(f)
        angles = [float(np.max(subspace_angles(a, b))) for a, b in zip(found, true)]
        report["subspace_angles"] = angles
        report["error"] = pair_angle_error(found, true)
        rebuilt = None
    else:
        j = reconstruct_cr(s, seed=solver_seed, info=info)
        report["error"] = sign_error(j, f.structure)
        rebuilt = build_s(ContactFiber(np.asarray(f.levi, dtype=float), j, "complex"))
        report["subspace_angles"] = []
    report["residuals"] = {"solver": info.get("max_residual", 0.0)}
    if rebuilt is not None:
        report["residuals"]["rebuild"] = float(np.max(np.abs(rebuilt.coeffs - s.coeffs)) / s.norm())
    report["iterations"] = info.get("starts", 0)
    return report
