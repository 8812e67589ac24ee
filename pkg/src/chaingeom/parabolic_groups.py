"""Group elements of G, P, Q and the path-geometry groups, modulo center.

A :class:`GroupElement` holds a float representative acting on the same
matrix space as its algebra (realified for cr), normalized to ``|det| = 1``.
When the representative is rational an exact copy is carried along so that
adjoint actions of such elements stay exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from . import linalg
from .graded_lie import AlgebraElement, AlgebraError, GradedAlgebra, hermitian_gram

TOL = 1e-10


class GroupError(ValueError):
    pass


# -- realification helpers ----------------------------------------------------


def realify(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    re, im = m.real, m.imag
    return np.block([[re, -im], [im, re]])


def complexify(r: np.ndarray) -> np.ndarray:
    n = r.shape[0] // 2
    return r[:n, :n] + 1j * r[n:, :n]


def ambient(alg: GradedAlgebra, m: np.ndarray) -> np.ndarray:
    """Matrix in the defining representation (complex for cr)."""
    return complexify(m) if alg.is_complex else m


def from_ambient(alg: GradedAlgebra, m: np.ndarray) -> np.ndarray:
    return realify(m) if alg.is_complex else np.asarray(m, dtype=float)


def block_index(alg: GradedAlgebra) -> np.ndarray:
    """Block number of each row/column of the defining representation."""
    return np.repeat(np.arange(len(alg.block_sizes)), alg.block_sizes)


def grade_mask(alg: GradedAlgebra) -> np.ndarray:
    """``mask[r, c]`` is the grade of the (r, c) entry in the defining representation."""
    b = block_index(alg)
    return b[None, :] - b[:, None]


# -- nilpotent exponential and unipotent logarithm --------------------------


def _power_series(x: np.ndarray, coeff, start_identity: bool) -> np.ndarray:
    n = x.shape[0]
    if x.dtype == object:
        ident = np.array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], dtype=object)
    else:
        ident = np.eye(n, dtype=x.dtype)
    out = ident.copy() if start_identity else ident * 0
    term = ident
    for k in range(1, n + 1):
        term = term.dot(x)
        if not np.any(term != 0):
            return out
        out = out + term * coeff(k)
    if np.any(term.dot(x) != 0):
        raise GroupError("matrix is not nilpotent")
    return out


def _factorial(k: int) -> int:
    out = 1
    for j in range(2, k + 1):
        out *= j
    return out


def exp_nilpotent(x: np.ndarray) -> np.ndarray:
    """exp of a nilpotent matrix as a terminating sum (exact for object arrays)."""
    if x.dtype == object:
        return _power_series(x, lambda k: Fraction(1, _factorial(k)), True)
    return _power_series(x, lambda k: 1.0 / _factorial(k), True)


def log_unipotent(u: np.ndarray) -> np.ndarray:
    n = u.shape[0]
    if u.dtype == object:
        x = u - np.array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], dtype=object)
        return _power_series(x, lambda k: Fraction((-1) ** (k + 1), k), False)
    x = u - np.eye(n)
    return _power_series(x, lambda k: (-1) ** (k + 1) / k, False)


# -- group elements -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GroupElement:
    algebra: GradedAlgebra
    matrix: np.ndarray
    exact: Optional[np.ndarray] = None

    @classmethod
    def make(cls, alg: GradedAlgebra, m, exact: Optional[np.ndarray] = None) -> "GroupElement":
        m = np.asarray(m, dtype=float)
        if m.shape != (alg.matrix_size, alg.matrix_size):
            raise GroupError(f"expected a {alg.matrix_size}x{alg.matrix_size} matrix")
        det = np.linalg.det(m)
        if not np.isfinite(det) or abs(det) < 1e-300:
            raise GroupError("singular representative")
        m = m / abs(det) ** (1.0 / m.shape[0])
        return cls(alg, m, exact)

    @classmethod
    def from_ambient(cls, alg: GradedAlgebra, m) -> "GroupElement":
        return cls.make(alg, from_ambient(alg, np.asarray(m)))

    @classmethod
    def from_exact(cls, alg: GradedAlgebra, m: np.ndarray) -> "GroupElement":
        """Exact rational representative given on the algebra's matrix space."""
        m = np.asarray(m, dtype=object)
        return cls.make(alg, m.astype(float), m)

    @classmethod
    def identity(cls, alg: GradedAlgebra) -> "GroupElement":
        n = alg.matrix_size
        ident = np.array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], dtype=object)
        return cls.from_exact(alg, ident)

    def ambient(self) -> np.ndarray:
        return ambient(self.algebra, self.matrix)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        if other.algebra is not self.algebra:
            raise GroupError("elements belong to different groups")
        exact = None
        if self.exact is not None and other.exact is not None:
            exact = self.exact.dot(other.exact)
        return GroupElement.make(self.algebra, self.matrix @ other.matrix, exact)

    def inverse(self) -> "GroupElement":
        exact = None
        if self.exact is not None:
            exact = np.array(linalg.inverse(self.exact.tolist()), dtype=object)
        return GroupElement.make(self.algebra, np.linalg.inv(self.matrix), exact)

    def equals(self, other: "GroupElement", tol: float = 1e-9) -> bool:
        """Equality modulo the center (real or unit-complex scalars)."""
        a, b = self.ambient(), other.ambient()
        lam = np.vdot(b, a) / np.vdot(b, b)
        if not self.algebra.is_complex:
            lam = lam.real
        return bool(np.linalg.norm(a - lam * b) <= tol * max(1.0, np.linalg.norm(a)))


def group_exp(x: AlgebraElement) -> GroupElement:
    """exp of an algebra element; exact polynomial sum when nilpotent."""
    alg = x.algebra
    grades = {alg.grades[i] for i, c in enumerate(x.coords) if c}
    if not grades and x.is_exact:
        return GroupElement.identity(alg)
    nilpotent = grades and (min(grades) > 0 or max(grades) < 0)
    if x.is_exact and nilpotent:
        e = exp_nilpotent(x.dense())
        return GroupElement.from_exact(alg, e)
    d = np.asarray(x.dense(), dtype=float)
    if nilpotent:
        return GroupElement.make(alg, exp_nilpotent(d))
    return GroupElement.make(alg, expm(d))


def adjoint(g: GroupElement, x: AlgebraElement) -> AlgebraElement:
    """Coordinates of ``g X g^{-1}``; exact when both inputs are exact."""
    alg = x.algebra
    if g.algebra is not alg:
        raise AlgebraError("group element and algebra element do not match")
    if g.exact is not None and x.is_exact:
        inv = np.array(linalg.inverse(g.exact.tolist()), dtype=object)
        m = g.exact.dot(x.dense()).dot(inv)
        sparse = {(r, c): v for (r, c), v in np.ndenumerate(m) if v != 0}
        return AlgebraElement(alg, alg.coords(sparse))
    m = g.matrix @ np.asarray(x.dense(), dtype=float) @ np.linalg.inv(g.matrix)
    return AlgebraElement(alg, tuple(alg.float_coords(m)))


def adjoint_matrix(g: GroupElement) -> np.ndarray:
    """Float matrix of Ad(g) acting on coordinate columns."""
    alg = g.algebra
    basis = alg.float_basis()
    inv = np.linalg.inv(g.matrix)
    conj = np.einsum("ij,kjl,lm->kim", g.matrix, basis, inv)
    return (conj.reshape(alg.dim, -1) @ alg._float_coord_map).T


# -- P factorization ----------------------------------------------------------


def _masked(alg: GradedAlgebra, m: np.ndarray, grade: int) -> np.ndarray:
    return np.where(grade_mask(alg) == grade, m, 0)


def in_p(g: GroupElement, tol: float = TOL) -> bool:
    m = g.ambient()
    below = np.abs(np.where(grade_mask(g.algebra) < 0, m, 0)).max(initial=0.0)
    return bool(below <= tol * max(1.0, np.abs(m).max()))


def decompose_p(g: GroupElement) -> Tuple[GroupElement, AlgebraElement, AlgebraElement]:
    """Write ``g = g0 exp(Z1) exp(Z2)`` with g0 block diagonal, Z_i in g_i."""
    alg = g.algebra
    if not in_p(g):
        raise GroupError("element is not block upper triangular")
    m = g.ambient()
    m = np.where(grade_mask(alg) < 0, 0, m)
    g0 = np.where(grade_mask(alg) == 0, m, 0)
    u = np.linalg.solve(g0, m)
    # drop round-off below the block diagonal so the series terminates
    u = np.where(grade_mask(alg) > 0, u, np.eye(len(u)))
    log = log_unipotent(u)
    # [Z1, Z2] lies in g_3 = 0, so log(exp Z1 exp Z2) = Z1 + Z2
    z1 = alg.float_coords(from_ambient(alg, _masked(alg, log, 1)))
    z2 = alg.float_coords(from_ambient(alg, _masked(alg, log, 2)))
    return (
        GroupElement.from_ambient(alg, g0),
        AlgebraElement(alg, tuple(z1)),
        AlgebraElement(alg, tuple(z2)),
    )


def compose_p(g0: GroupElement, z1: AlgebraElement, z2: AlgebraElement) -> GroupElement:
    return g0 @ group_exp(z1) @ group_exp(z2)


def in_q(g: GroupElement, tol: float = TOL) -> bool:
    """Membership in Q: the g_1 factor of the P factorization vanishes."""
    _, z1, _ = decompose_p(g)
    return bool(np.max(np.abs(np.asarray(z1.coords, dtype=float)), initial=0.0) <= tol)


def solve_transversal(x2: AlgebraElement, x1: AlgebraElement) -> AlgebraElement:
    """The unique ``Z`` in g_1 with ``[Z, X2] = X1`` (exact).

    Only meaningful for contact gradings, where ``ad(X2)`` maps g_1 onto g_-1.
    """
    alg = x2.algebra
    if x1.algebra is not alg:
        raise AlgebraError("elements belong to different algebras")
    plus = alg.grade_indices(1)
    minus = alg.grade_indices(-1)
    top = alg.grade_indices(-2)
    if any(c for i, c in enumerate(x2.coords) if i not in top):
        raise GroupError("X2 must lie in g_-2")
    if any(c for i, c in enumerate(x1.coords) if i not in minus):
        raise GroupError("X1 must lie in g_-1")
    if x2.is_zero():
        raise GroupError("X2 must be nonzero")
    # column k: g_-1 part of [e_k, X2]
    cols = [alg.bracket_coords(alg.unit_vectors[k], x2.coords) for k in plus]
    rows = [{j: cols[j][i] for j in range(len(plus)) if cols[j][i]} for i in minus]
    sol = linalg.solve(rows, [x1.coords[i] for i in minus], len(plus))
    out = [Fraction(0)] * alg.dim
    for k, v in zip(plus, sol):
        out[k] = v
    return AlgebraElement(alg, tuple(out))


# -- explicit Q elements ------------------------------------------------------


def lagrangean_q(alg: GradedAlgebra, p: float, r: np.ndarray, q: float, s: float) -> GroupElement:
    """Block matrix ((p, 0, s), (0, R, 0), (0, 0, q)) of Q."""
    n = alg.ambient_size - 2
    m = np.zeros((n + 2, n + 2))
    m[0, 0], m[0, -1], m[-1, -1] = p, s, q
    m[1:-1, 1:-1] = r
    return GroupElement.make(alg, m)


def cr_q(alg: GradedAlgebra, phi: complex, big_phi: np.ndarray, a: float) -> GroupElement:
    """Block matrix ((phi, 0, i a phi), (0, Phi, 0), (0, 0, 1/conj(phi))) of Q."""
    n = alg.ambient_size - 2
    m = np.zeros((n + 2, n + 2), dtype=complex)
    m[0, 0] = phi
    m[0, -1] = 1j * a * phi
    m[1:-1, 1:-1] = big_phi
    m[-1, -1] = 1 / np.conj(phi)
    return GroupElement.from_ambient(alg, m)


def random_unitary_pq(p: int, q: int, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    """exp of a random element of u(p, q)."""
    n = p + q
    sig = np.diag([1.0] * p + [-1.0] * q)
    k = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    k = (k - k.conj().T) / 2  # anti-Hermitian
    return expm(scale * sig @ k)


def random_q(alg: GradedAlgebra, rng: np.random.Generator, scale: float = 0.5) -> GroupElement:
    """Random element of Q for the lagrangean or cr algebra."""
    if alg.family == "lagrangean":
        n = alg.ambient_size - 2
        p = rng.choice([-1, 1]) * np.exp(scale * rng.normal())
        q = rng.choice([-1, 1]) * np.exp(scale * rng.normal())
        r = expm(scale * rng.normal(size=(n, n)))
        if rng.random() < 0.5:
            r[0] *= -1
        return lagrangean_q(alg, p, r, q, scale * rng.normal())
    if alg.family == "cr":
        big_phi = random_unitary_pq(*alg.params, rng, scale)
        theta = -np.angle(np.linalg.det(big_phi)) / 2 + np.pi * rng.integers(2)
        phi = np.exp(scale * rng.normal()) * np.exp(1j * theta)
        return cr_q(alg, phi, big_phi, scale * rng.normal())
    raise GroupError("Q is defined for lagrangean and cr algebras")


def random_algebra_element(alg: GradedAlgebra, rng: np.random.Generator, labels: Sequence[str] = (), scale: float = 1.0) -> AlgebraElement:
    """Float element with random coordinates on the given components (all if empty)."""
    idx = set(alg.indices(*labels)) if labels else set(range(alg.dim))
    return AlgebraElement(alg, tuple(scale * rng.normal() if i in idx else 0.0 for i in range(alg.dim)))


def random_rational_element(alg: GradedAlgebra, rng: np.random.Generator, labels: Sequence[str] = (), bound: int = 5) -> AlgebraElement:
    idx = set(alg.indices(*labels)) if labels else set(range(alg.dim))
    return AlgebraElement(
        alg,
        tuple(Fraction(int(rng.integers(-bound, bound + 1)), int(rng.integers(1, 4))) if i in idx else Fraction(0) for i in range(alg.dim)),
    )


def random_group(alg: GradedAlgebra, rng: np.random.Generator, scale: float = 0.3) -> GroupElement:
    return group_exp(random_algebra_element(alg, rng, scale=scale))


def random_p(alg: GradedAlgebra, rng: np.random.Generator, scale: float = 0.5) -> GroupElement:
    """Random element of P: exp of g_0 times exp of p_+."""
    g0 = group_exp(random_algebra_element(alg, rng, ["g0"], scale))
    plus = random_algebra_element(alg, rng, [lab for lab in alg.component_order if lab.startswith("g1") or lab == "g2"], scale)
    return g0 @ group_exp(plus)


def check_cr_unitary(g: GroupElement, tol: float = 1e-9) -> bool:
    """Whether the representative preserves the Hermitian form up to scale."""
    m = g.ambient()
    gram = hermitian_gram(*g.algebra.params)
    lhs = m.conj().T @ gram @ m
    lam = np.vdot(gram, lhs) / np.vdot(gram, gram)
    return bool(np.linalg.norm(lhs - lam * gram) <= tol * np.linalg.norm(lhs))
