"""Extension pairs (i, alpha) from contact gradings to path geometries.

For the lagrangean algebra of sl(n+2) and the cr algebra of su(p+1, q+1)
(both with n = dim g_-1 / 2 ... i.e. a (2n+1)-dimensional contact manifold)
the target is the path algebra sl(2n+2) with blocks 1, 1, 2n; the last block
is further split into two halves of size n.

``alpha`` is stored as an exact rational matrix over the two bases; ``i`` is
evaluated in floating point since it involves square roots and absolute
values.  The derivative ``i'`` on q = g_0 + g_2 is implemented from its own
closed form (obtained by differentiating ``i`` by hand), so comparing it to
``alpha`` restricted to q is a genuine check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import linalg
from .graded_lie import AlgebraElement, GradedAlgebra, build_algebra, complex_blocks
from .hodge import CochainMap, complex_for
from .parabolic_groups import (
    GroupElement,
    adjoint,
    adjoint_matrix,
    in_p,
    in_q,
    random_rational_element,
)

HALF = Fraction(1, 2)


class ExtensionError(ValueError):
    pass


def _zeros(rows: int, cols: int) -> np.ndarray:
    return np.array([[Fraction(0)] * cols for _ in range(rows)], dtype=object)


# -- closed forms for alpha and i' -------------------------------------------------


def _alpha_lagrangean(x: np.ndarray, n: int) -> np.ndarray:
    a, c, d, z = x[0, 0], x[-1, -1], x[0, -1], x[-1, 0]
    u, v = x[0, 1:-1], x[1:-1, -1]
    xx, y = x[1:-1, 0], x[-1, 1:-1]
    b = x[1:-1, 1:-1]
    out = _zeros(2 * n + 2, 2 * n + 2)
    eye = np.array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], dtype=object)
    out[0, 0] = (a - c) / 2
    out[0, 1] = d
    out[0, 2:n + 2] = u * HALF
    out[0, n + 2:] = v * HALF
    out[1, 0] = z
    out[1, 1] = (c - a) / 2
    out[1, 2:n + 2] = y * HALF
    out[1, n + 2:] = -xx * HALF
    out[2:n + 2, 0] = xx
    out[2:n + 2, 1] = v
    out[2:n + 2, 2:n + 2] = b - eye * ((a + c) / 2)
    out[n + 2:, 0] = y
    out[n + 2:, 1] = -u
    out[n + 2:, n + 2:] = -b.T + eye * ((a + c) / 2)
    return out


def _i_prime_lagrangean(x: np.ndarray, n: int) -> np.ndarray:
    # derivative of i at the identity along p = 1 + ta, R = 1 + tB, q = 1 + tc, s = td
    a, c, d = x[0, 0], x[-1, -1], x[0, -1]
    b = x[1:-1, 1:-1]
    out = _zeros(2 * n + 2, 2 * n + 2)
    eye = np.array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], dtype=object)
    out[0, 0] = (a - c) / 2          # d/dt sqrt|p/q|
    out[0, 1] = d                    # d/dt (s/p) sqrt|p/q|
    out[1, 1] = (c - a) / 2          # d/dt sqrt|q/p|
    out[2:n + 2, 2:n + 2] = b - eye * c + eye * ((c - a) / 2)
    out[n + 2:, n + 2:] = eye * a + eye * ((c - a) / 2) - b.T
    return out


def _cr_parts(alg: GradedAlgebra, coords) -> dict:
    re, im = complex_blocks(alg, coords)
    n = alg.ambient_size - 2
    sig = np.array([Fraction(s) for s in [1] * alg.params[0] + [-1] * alg.params[1]], dtype=object)
    return {
        "re_w": re[0, 0], "im_w": im[0, 0],
        "z": im[0, -1], "x": im[-1, 0],
        "re_Z": re[0, 1:-1], "im_Z": im[0, 1:-1],
        "re_X": re[1:-1, 0], "im_X": im[1:-1, 0],
        "re_A": re[1:-1, 1:-1], "im_A": im[1:-1, 1:-1],
        "sig": sig, "n": n,
    }


def _alpha_cr(parts: dict) -> np.ndarray:
    n = parts["n"]
    sig = parts["sig"]
    eye = np.array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], dtype=object)
    out = _zeros(2 * n + 2, 2 * n + 2)
    # X^* I as a row: conj(X)^t I  ->  real part re_X * sig, imaginary part -im_X * sig
    xsi_re, xsi_im = parts["re_X"] * sig, -parts["im_X"] * sig
    # I Z^* as a column: I conj(Z)^t -> real part sig * re_Z, imaginary part -sig * im_Z
    iz_re, iz_im = sig * parts["re_Z"], -sig * parts["im_Z"]
    out[0, 0] = parts["re_w"]
    out[0, 1] = -parts["z"]
    out[0, 2:n + 2] = parts["re_Z"]
    out[0, n + 2:] = -parts["im_Z"]
    out[1, 0] = parts["x"]
    out[1, 1] = -parts["re_w"]
    out[1, 2:n + 2] = -xsi_im
    out[1, n + 2:] = -xsi_re
    out[2:n + 2, 0] = parts["re_X"]
    out[2:n + 2, 1] = iz_im
    out[2:n + 2, 2:n + 2] = parts["re_A"]
    out[2:n + 2, n + 2:] = -parts["im_A"] + eye * parts["im_w"]
    out[n + 2:, 0] = parts["im_X"]
    out[n + 2:, 1] = -iz_re
    out[n + 2:, 2:n + 2] = parts["im_A"] - eye * parts["im_w"]
    out[n + 2:, n + 2:] = parts["re_A"]
    return out


def _i_prime_cr(parts: dict) -> np.ndarray:
    # derivative along phi = 1 + tw, Phi = 1 + tA, a = tz:
    # |phi| -> Re w, -a|phi| -> -z, |phi|/phi Phi -> A - i Im w
    n = parts["n"]
    eye = np.array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], dtype=object)
    out = _zeros(2 * n + 2, 2 * n + 2)
    out[0, 0] = parts["re_w"]
    out[0, 1] = -parts["z"]
    out[1, 1] = -parts["re_w"]
    re_m, im_m = parts["re_A"], parts["im_A"] - eye * parts["im_w"]
    out[2:n + 2, 2:n + 2] = re_m
    out[2:n + 2, n + 2:] = -im_m
    out[n + 2:, 2:n + 2] = im_m
    out[n + 2:, n + 2:] = re_m
    return out


# -- the group-level maps ---------------------------------------------------------


def _i_lagrangean(m: np.ndarray) -> np.ndarray:
    n = m.shape[0] - 2
    p, q, s = m[0, 0], m[-1, -1], m[0, -1]
    r = m[1:-1, 1:-1]
    sg = np.sign(q / p)
    out = np.zeros((2 * n + 2, 2 * n + 2))
    out[0, 0] = sg * np.sqrt(abs(p / q))
    out[0, 1] = sg * (s / p) * np.sqrt(abs(p / q))
    out[1, 1] = np.sqrt(abs(q / p))
    out[2:n + 2, 2:n + 2] = np.sqrt(abs(q / p)) / q * r
    out[n + 2:, n + 2:] = p * np.sqrt(abs(q / p)) * np.linalg.inv(r).T
    return out


def _i_cr(m: np.ndarray) -> np.ndarray:
    n = m.shape[0] - 2
    phi = m[0, 0]
    a = (m[0, -1] / (1j * phi)).real
    big = m[1:-1, 1:-1]
    r = abs(phi)
    rot = (r / phi) * big
    out = np.zeros((2 * n + 2, 2 * n + 2))
    out[0, 0] = r
    out[0, 1] = -a * r
    out[1, 1] = 1 / r
    out[2:n + 2, 2:n + 2] = rot.real
    out[2:n + 2, n + 2:] = -rot.imag
    out[n + 2:, 2:n + 2] = rot.imag
    out[n + 2:, n + 2:] = rot.real
    return out


# -- the pair ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ExtensionPair:
    case: str
    source: GradedAlgebra
    target: GradedAlgebra
    alpha_matrix: np.ndarray  # object array, shape (target.dim, source.dim)
    witness: Optional[GroupElement] = None  # conjugating element of P~, if any

    @property
    def n(self) -> int:
        return self.source.ambient_size - 2

    # alpha ------------------------------------------------------------------

    def alpha(self, x: AlgebraElement) -> AlgebraElement:
        if x.algebra is not self.source:
            raise ExtensionError("element is not in the source algebra")
        if x.is_exact:
            col = self.alpha_matrix.dot(np.array(x.coords, dtype=object))
            return AlgebraElement(self.target, tuple(col))
        col = self.alpha_float @ np.asarray(x.coords, dtype=float)
        return AlgebraElement(self.target, tuple(col))

    @cached_property
    def alpha_float(self) -> np.ndarray:
        return self.alpha_matrix.astype(float)

    @cached_property
    def _alpha_columns(self) -> List[List[Tuple[int, Fraction]]]:
        return [
            [(r, v) for r, v in enumerate(self.alpha_matrix[:, c]) if v]
            for c in range(self.source.dim)
        ]

    def alpha_coords(self, coords: Sequence) -> Tuple:
        out = [Fraction(0)] * self.target.dim
        for c, x in enumerate(coords):
            if x:
                for r, v in self._alpha_columns[c]:
                    out[r] += x * v
        return tuple(out)

    # i and i' -------------------------------------------------------------------

    def i_map(self, g: GroupElement) -> GroupElement:
        if g.algebra is not self.source:
            raise ExtensionError("group element is not in the source group")
        # both closed forms are invariant under rescaling the representative
        m = g.ambient()
        base = _i_cr(m) if self.case == "cr" else _i_lagrangean(m)
        out = GroupElement.make(self.target, base)
        if self.witness is not None:
            out = self.witness.inverse() @ out @ self.witness
        return out

    def i_prime(self, x: AlgebraElement) -> AlgebraElement:
        src = self.source
        if any(c for i, c in enumerate(x.coords) if src.grades[i] not in (0, 2)):
            raise ExtensionError("i' is defined on q = g_0 + g_2")
        if self.case == "cr":
            mat = _i_prime_cr(_cr_parts(src, x.coords))
        else:
            mat = _i_prime_lagrangean(src.dense(x.coords), self.n)
        out = self.target.from_matrix(mat)
        if self.witness is not None:
            out = _conjugate_exact(self.target, self.witness, out)
        return out

    # index sets ----------------------------------------------------------------

    @cached_property
    def q_indices(self) -> List[int]:
        return self.source.grade_indices(0, 2)

    @cached_property
    def complement_indices(self) -> List[int]:
        """Basis of a complement of q in g: g_-2 + g_-1 + g_1."""
        return self.source.grade_indices(-2, -1, 1)

    @cached_property
    def target_minus(self) -> List[int]:
        return self.target.grade_indices(-2, -1)

    @cached_property
    def alpha_bar(self) -> List[List[Fraction]]:
        """Matrix of g/q -> g~/p~ in the bases (complement) -> (g~_-)."""
        return [[self.alpha_matrix[r, c] for c in self.complement_indices] for r in self.target_minus]

    @cached_property
    def alpha_bar_inverse(self) -> List[List[Fraction]]:
        return linalg.inverse(self.alpha_bar)

    def preimage(self, x_minus: Sequence) -> Tuple[Fraction, ...]:
        """Preimage in the complement of q of a g~_- vector (coordinates on g~_-)."""
        inv = self.alpha_bar_inverse
        out = [Fraction(0)] * self.source.dim
        for row, idx in zip(inv, self.complement_indices):
            out[idx] = sum((r * v for r, v in zip(row, x_minus) if v), Fraction(0))
        return tuple(out)

    def preimage_mod_p(self, x_minus: Sequence) -> Tuple[Fraction, ...]:
        """Image of the preimage in g/p, represented on g_-."""
        pre = list(self.preimage(x_minus))
        for i, g in enumerate(self.source.grades):
            if g >= 0:
                pre[i] = Fraction(0)
        return tuple(pre)


def _conjugate_exact(alg: GradedAlgebra, witness: GroupElement, x: AlgebraElement) -> AlgebraElement:
    """Ad(witness^-1) x, exact when possible."""
    return adjoint(witness.inverse(), x)


def build_pair(case: str, *params: int) -> ExtensionPair:
    """The pair for ``("lagrangean", n)`` or ``("cr", p, q)``; target is path(2n)."""
    if case == "lagrangean":
        src = build_algebra("lagrangean", *params)
        n = params[0]
        images = [_alpha_lagrangean(src.dense(e), n) for e in src.unit_vectors]
    elif case == "cr":
        src = build_algebra("cr", *params)
        n = sum(params)
        images = [_alpha_cr(_cr_parts(src, e)) for e in src.unit_vectors]
    else:
        raise ExtensionError(f"unknown case {case!r}")
    tgt = build_algebra("path", 2 * n)
    cols = [tgt.from_matrix(m).coords for m in images]
    mat = np.array([list(r) for r in zip(*cols)], dtype=object)
    return ExtensionPair(case, src, tgt, mat)


def conjugate_pair(pair: ExtensionPair, witness: GroupElement) -> ExtensionPair:
    """The pair (g~^-1 i g~, Ad(g~^-1) alpha) for g~ in P~."""
    if not in_p(witness):
        raise ExtensionError("witness is not in P~")
    cols = []
    for k in range(pair.source.dim):
        img = AlgebraElement(pair.target, tuple(pair.alpha_matrix[:, k]))
        cols.append(_conjugate_exact(pair.target, witness, img).coords)
    mat = np.array([list(r) for r in zip(*cols)], dtype=object)
    total = witness if pair.witness is None else pair.witness @ witness
    return ExtensionPair(pair.case, pair.source, pair.target, mat, total)


def pairs_equivalent(
    pair1: ExtensionPair,
    pair2: ExtensionPair,
    witness: GroupElement,
    samples: Sequence[GroupElement] = (),
    tol: float = 1e-9,
) -> bool:
    """Whether alpha2 = Ad(w^-1) alpha1 and i2(g) = w^-1 i1(g) w on the samples."""
    if not in_p(witness):
        raise ExtensionError("witness is not in P~")
    if pair1.source is not pair2.source or pair1.target is not pair2.target:
        return False
    inv = witness.inverse()
    for k in range(pair1.source.dim):
        img = AlgebraElement(pair1.target, tuple(pair1.alpha_matrix[:, k]))
        conj = _conjugate_exact(pair1.target, witness, img).coords
        want = pair2.alpha_matrix[:, k]
        if img.is_exact and witness.exact is not None:
            if any(a != b for a, b in zip(conj, want)):
                return False
        elif np.max(np.abs(np.asarray(conj, dtype=float) - want.astype(float))) > tol:
            return False
    for g in samples:
        if not (inv @ pair1.i_map(g) @ witness).equals(pair2.i_map(g), tol):
            return False
    return True


# -- conditions ------------------------------------------------------------------


@dataclass
class ConditionReport:
    condition1_residual: float
    condition1_infinitesimal: bool
    condition2_exact: bool
    condition3_rank: int
    condition3_expected: int

    @property
    def passed(self) -> bool:
        return (
            self.condition1_residual <= 1e-9
            and self.condition1_infinitesimal
            and self.condition2_exact
            and self.condition3_rank == self.condition3_expected
        )

    def to_json(self) -> dict:
        return {
            "condition1_residual": self.condition1_residual,
            "condition1_infinitesimal": self.condition1_infinitesimal,
            "condition2_exact": self.condition2_exact,
            "condition3_rank": self.condition3_rank,
            "condition3_expected": self.condition3_expected,
        }


def condition1_residual(pair: ExtensionPair, g: GroupElement) -> float:
    """max |alpha Ad(g) - Ad(i(g)) alpha| relative to |alpha|."""
    lhs = pair.alpha_float @ adjoint_matrix(g)
    rhs = adjoint_matrix(pair.i_map(g)) @ pair.alpha_float
    return float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(pair.alpha_float)))


def condition1_infinitesimal(pair: ExtensionPair) -> bool:
    """alpha([A, X]) = [alpha(A), alpha(X)] for A in a q-basis and all basis X."""
    src, tgt = pair.source, pair.target
    for i in pair.q_indices:
        a_img = pair.alpha_coords(src.unit_vectors[i])
        for k in range(src.dim):
            lhs = pair.alpha_coords(src.bracket_coords(src.unit_vectors[i], src.unit_vectors[k]))
            rhs = tgt.bracket_coords(a_img, pair.alpha_coords(src.unit_vectors[k]))
            if tuple(lhs) != tuple(rhs):
                return False
    return True


def condition2(pair: ExtensionPair) -> bool:
    """alpha restricted to q equals i'."""
    src = pair.source
    for i in pair.q_indices:
        e = src.basis_element(i)
        if tuple(pair.alpha(e).coords) != tuple(pair.i_prime(e).coords):
            return False
    return True


def condition3_rank(pair: ExtensionPair) -> int:
    return linalg.rank(linalg.sparse_rows(pair.alpha_bar))


def check_conditions(pair: ExtensionPair, samples: Sequence[GroupElement]) -> ConditionReport:
    residual = 0.0
    for g in samples:
        if not in_q(g):
            raise ExtensionError("sample is not in Q")
        residual = max(residual, condition1_residual(pair, g))
    return ConditionReport(
        condition1_residual=residual,
        condition1_infinitesimal=condition1_infinitesimal(pair),
        condition2_exact=condition2(pair),
        condition3_rank=condition3_rank(pair),
        condition3_expected=len(pair.target_minus),
    )


def perturbed(pair: ExtensionPair, row: int, col: int, delta=Fraction(1)) -> ExtensionPair:
    """Copy of the pair with one entry of alpha changed (negative control)."""
    mat = pair.alpha_matrix.copy()
    mat[row, col] = mat[row, col] + delta
    return ExtensionPair(pair.case, pair.source, pair.target, mat, pair.witness)


# -- Psi_alpha, phi and the curvature transfer -------------------------------------------


def _unit_minus(pair: ExtensionPair, idx: int) -> List[Fraction]:
    return [Fraction(int(j == idx)) for j in pair.target_minus]


def psi_value(pair: ExtensionPair, x: Sequence, y: Sequence) -> Tuple[Fraction, ...]:
    """Psi(X~, Y~) for g~_- coordinate vectors, via preimages in the complement."""
    src, tgt = pair.source, pair.target
    px, py = pair.preimage(x), pair.preimage(y)
    br = tgt.bracket_coords(pair.alpha_coords(px), pair.alpha_coords(py))
    corr = pair.alpha_coords(src.bracket_coords(px, py))
    return tuple(a - b for a, b in zip(br, corr))


def psi_value_shifted(pair: ExtensionPair, x: Sequence, y: Sequence, qx: Sequence, qy: Sequence) -> Tuple:
    """Psi computed from preimages shifted by elements of q (well-definedness check)."""
    src, tgt = pair.source, pair.target
    px = [a + b for a, b in zip(pair.preimage(x), qx)]
    py = [a + b for a, b in zip(pair.preimage(y), qy)]
    br = tgt.bracket_coords(pair.alpha_coords(px), pair.alpha_coords(py))
    corr = pair.alpha_coords(src.bracket_coords(px, py))
    return tuple(a - b for a, b in zip(br, corr))


def psi_alpha(pair: ExtensionPair) -> CochainMap:
    """[alpha(X), alpha(Y)] - alpha([X, Y]) as a cochain on g~_- (cached per pair)."""
    cached = pair.__dict__.get("_psi")
    if cached is not None:
        return cached
    coeffs = {}
    minus = pair.target_minus
    for i, j in itertools.combinations(range(len(minus)), 2):
        val = psi_value(pair, _unit_minus(pair, minus[i]), _unit_minus(pair, minus[j]))
        for k, v in enumerate(val):
            if v:
                coeffs[(minus[i], minus[j]), k] = v
    psi = CochainMap(pair.target, 2, coeffs)
    pair.__dict__["_psi"] = psi
    return psi


def phi_matrix(pair: ExtensionPair) -> Dict[int, Dict[int, Fraction]]:
    """phi on the f-basis: ``phi(f^a) = sum_x M[a][x] f~^x``.

    phi is dual to g~/p~ -> g/q -> g/p under the trace pairings, so the
    coefficient of f~^x is the e_a coordinate of the g/p image of e~_x.
    """
    out: Dict[int, Dict[int, Fraction]] = {a: {} for a in pair.source.grade_indices(-2, -1)}
    for x in pair.target_minus:
        pre = pair.preimage_mod_p(_unit_minus(pair, x))
        for a in out:
            if pre[a]:
                out[a][x] = pre[a]
    return out


def phi_dual(pair: ExtensionPair, z: AlgebraElement) -> AlgebraElement:
    """The map p_+ -> p~_+ dual to g~/p~ -> g/q -> g/p (trace forms on both sides)."""
    src, tgt = pair.source, pair.target
    if z.algebra is not src:
        raise ExtensionError("element is not in the source algebra")
    if any(c for i, c in enumerate(z.coords) if src.grades[i] <= 0):
        raise ExtensionError("element is not in p_+")
    cx_s, cx_t = complex_for(src), complex_for(tgt)
    fz = cx_s.dual_coords(z.coords)
    out = [Fraction(0)] * tgt.dim
    for a, coef in fz.items():
        for x, v in phi_matrix(pair)[a].items():
            for k, w in enumerate(cx_t.dual_basis[x]):
                if w:
                    out[k] += coef * v * w
    return AlgebraElement(tgt, tuple(out))


def phi_duality_constant(pair: ExtensionPair, rng: np.random.Generator, trials: int = 5) -> Fraction:
    """Constant c with tr(phi(z) X~) = c tr(z pi(alpha_bar^-1 X~)) on random samples.

    Raises if the ratio is not the same for all samples.
    """
    src, tgt = pair.source, pair.target
    plus = [lab for lab in src.component_order if lab.startswith("g1") or lab == "g2"]
    ratios = set()
    for _ in range(trials):
        z = random_rational_element(src, rng, plus)
        xt = random_rational_element(tgt, rng, [lab for lab in tgt.component_order if tgt.grades[tgt.labels.index(lab)] < 0])
        lhs = tgt.trace_form_coords(phi_dual(pair, z).coords, xt.coords)
        pre = pair.preimage_mod_p([xt.coords[i] for i in pair.target_minus])
        rhs = src.trace_form_coords(z.coords, pre)
        if rhs == 0:
            if lhs != 0:
                raise ExtensionError("phi duality fails")
            continue
        ratios.add(lhs / rhs)
    if len(ratios) != 1:
        raise ExtensionError(f"phi duality ratios disagree: {ratios}")
    return ratios.pop()


def extend_curvature(pair: ExtensionPair, kappa: CochainMap) -> CochainMap:
    """Curvature of the extended geometry: alpha(kappa(pi X, pi Y)) + Psi(X, Y)."""
    if kappa.algebra is not pair.source or kappa.degree != 2:
        raise ExtensionError("kappa must be a degree 2 cochain on the source")
    tgt = pair.target
    minus = pair.target_minus
    pre = {x: pair.preimage_mod_p(_unit_minus(pair, x)) for x in minus}
    coeffs: Dict = {}
    for i, j in itertools.combinations(range(len(minus)), 2):
        x, y = minus[i], minus[j]
        val = [Fraction(0)] * pair.source.dim
        px, py = pre[x], pre[y]
        for (a, k), c in kappa.coeffs.items():
            w = px[a[0]] * py[a[1]] - px[a[1]] * py[a[0]]
            if w:
                val[k] += c * w
        img = pair.alpha_coords(val)
        for k, v in enumerate(img):
            if v:
                coeffs[(x, y), k] = v
    return CochainMap(tgt, 2, coeffs) + psi_alpha(pair)


def transfer_tensor(pair: ExtensionPair, kappa: CochainMap) -> CochainMap:
    """(Lambda^2 phi (x) alpha)(kappa) computed on the f-bases."""
    phi = phi_matrix(pair)
    tgt = pair.target
    out: Dict = {}
    for (a, k), c in kappa.coeffs.items():
        img = pair.alpha_coords(pair.source.unit_vectors[k])
        for x, u in phi[a[0]].items():
            for y, v in phi[a[1]].items():
                if x == y:
                    continue
                sign = 1 if x < y else -1
                key = (min(x, y), max(x, y))
                for m, w in enumerate(img):
                    if w:
                        out[key, m] = out.get((key, m), 0) + sign * c * u * v * w
    return CochainMap(tgt, 2, out)


# -- the symmetrization constant -----------------------------------------------------


def _trilinear_from_psi(pair: ExtensionPair) -> Dict[Tuple[int, int, int], List[Fraction]]:
    """(X, Y, Z) -> [Psi(X, [Y, W0]), Z] on basis vectors of g~_-2 (as vectors in R^2n)."""
    tgt = pair.target
    top = tgt.indices("g-2")
    w0 = tgt.coords({(0, 1): Fraction(1)})
    minus = pair.target_minus
    out = {}
    for i, xi in enumerate(top):
        for j, yj in enumerate(top):
            bracket = tgt.bracket_coords(tgt.unit_vectors[yj], w0)
            val = psi_value(pair, _unit_minus(pair, xi), [bracket[m] for m in minus])
            for k, zk in enumerate(top):
                res = tgt.bracket_coords(val, tgt.unit_vectors[zk])
                if any(res[m] for m in range(tgt.dim) if m not in top):
                    raise ExtensionError("contraction leaves g~_-2")
                out[i, j, k] = [res[m] for m in top]
    return out


def _symmetrize(fn: Callable[[int, int, int], List[Fraction]], dim: int) -> Dict[Tuple[int, int, int], List[Fraction]]:
    out = {}
    for i, j, k in itertools.product(range(dim), repeat=3):
        acc = [Fraction(0)] * dim
        for p in itertools.permutations((i, j, k)):
            for t, v in enumerate(fn(*p)):
                acc[t] += v
        out[i, j, k] = [v / 6 for v in acc]
    return out


def model_trilinear(pair: ExtensionPair) -> Callable[[int, int, int], List[Fraction]]:
    """The map whose symmetrization the contraction of Psi should reproduce."""
    n = pair.n
    dim = 2 * n

    if pair.case == "lagrangean":
        def fn(i, j, k):
            # <X_1, Y_2> (Z_1, -Z_2) for basis vectors e_i, e_j, e_k of R^2n
            pairing = Fraction(int(i < n and j >= n and i == j - n))
            out = [Fraction(0)] * dim
            out[k] = pairing if k < n else -pairing
            return out
    else:
        sig = [1] * pair.source.params[0] + [-1] * pair.source.params[1]

        def fn(i, j, k):
            # (<X_1, I Y_1> + <X_2, I Y_2>) (-Z_2, Z_1)
            pairing = Fraction(sig[i % n]) if i == j else Fraction(0)
            out = [Fraction(0)] * dim
            if k < n:
                out[k + n] = pairing
            else:
                out[k - n] = -pairing
            return out
    return fn


def psi_symmetrization_constant(pair: ExtensionPair) -> Fraction:
    """The rational c with contraction = c * symmetrized model map; raises if none."""
    contraction = _trilinear_from_psi(pair)
    sym = _symmetrize(model_trilinear(pair), 2 * pair.n)
    const = None
    for key, val in contraction.items():
        for a, b in zip(val, sym[key]):
            if b == 0:
                if a != 0:
                    raise ExtensionError("contraction is not a multiple of the symmetrization")
                continue
            if const is None:
                const = a / b
            elif a != const * b:
                raise ExtensionError("contraction is not a multiple of the symmetrization")
    if const is None or const == 0:
        raise ExtensionError("symmetrized model map vanishes")
    return const


def torsion_free_normal_basis(pair: ExtensionPair) -> List[CochainMap]:
    """Exact basis of ker(d*) within Lambda^2_0 p_+ (x) p-hat for the lagrangean source.

    Lambda^2_0 p_+ (x) g is the kernel of the bracket part of d*, so the space
    is cut out by both d* and its bracket part on cochains with values in p-hat.
    """
    from .hodge import hat_p_basis

    src = pair.source
    cx = complex_for(src)
    hat = hat_p_basis(src)
    pairs = list(itertools.combinations(cx.minus, 2))
    columns = []
    for a in pairs:
        for vec in hat:
            columns.append({(a, k): v for k, v in enumerate(vec) if v})
    rows: Dict[Tuple[int, object], Dict[int, Fraction]] = {}
    for j, col in enumerate(columns):
        for part in (0, 2):
            for key, v in col.items():
                for k2, w in cx.codiff_key(key, part).items():
                    row = rows.setdefault((part, k2), {})
                    row[j] = row.get(j, 0) + v * w
    null = linalg.nullspace([{j: v for j, v in r.items() if v} for r in rows.values()], len(columns))
    out = []
    for vec in null:
        coeffs: Dict = {}
        for j, s in vec.items():
            for key, v in columns[j].items():
                coeffs[key] = coeffs.get(key, 0) + s * v
        out.append(CochainMap(src, 2, coeffs))
    return out
