"""Contact-graded matrix Lie algebras with exact structure constants.

Three families are supported:

``lagrangean(n)``
    sl(n+2, R) graded by blocks of sizes 1, n, 1.
``path(m)``
    sl(m+2, R) graded by blocks of sizes 1, 1, m.
``cr(p, q)``
    su(p+1, q+1) for the Hermitian form with Gram matrix ``hermitian_gram``,
    graded by blocks 1, n, 1 with n = p+q.  Complex matrices are stored
    realified, ``A + iB -> [[A, -B], [B, A]]``, so every structure constant is
    rational.

Matrices are kept sparse as ``{(row, col): Fraction}`` dictionaries.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Sequence, Tuple

import numpy as np

from . import linalg

SparseMatrix = Dict[Tuple[int, int], Fraction]

# component labels, listed in ascending grade
LAGRANGEAN_LABELS = ("g-2", "g-1L", "g-1R", "g0", "g1L", "g1R", "g2")
PATH_LABELS = ("g-2", "g-1E", "g-1V", "g0", "g1E", "g1V", "g2")
CR_LABELS = ("g-2", "g-1", "g0", "g1", "g2")

_GRADE_OF_LABEL = {
    "g-2": -2, "g-1L": -1, "g-1R": -1, "g-1E": -1, "g-1V": -1, "g-1": -1,
    "g0": 0, "g1L": 1, "g1R": 1, "g1E": 1, "g1V": 1, "g1": 1, "g2": 2,
}


def label_grade(label: str) -> int:
    return _GRADE_OF_LABEL[label]


def dual_label(label: str) -> str:
    """Label of the trace-form dual component (g_i <-> g_{-i})."""
    if label == "g0":
        return label
    if label.startswith("g-"):
        return "g" + label[2:]
    return "g-" + label[1:]


class AlgebraError(ValueError):
    pass


def _commutator(x: SparseMatrix, y: SparseMatrix) -> SparseMatrix:
    out: SparseMatrix = {}
    by_row: Dict[int, List[Tuple[int, Fraction]]] = {}
    for (r, c), v in y.items():
        by_row.setdefault(r, []).append((c, v))
    for (r, c), v in x.items():
        for c2, w in by_row.get(c, ()):
            out[r, c2] = out.get((r, c2), 0) + v * w
    by_row = {}
    for (r, c), v in x.items():
        by_row.setdefault(r, []).append((c, v))
    for (r, c), v in y.items():
        for c2, w in by_row.get(c, ()):
            out[r, c2] = out.get((r, c2), 0) - v * w
    return {k: v for k, v in out.items() if v}


def _realify(entries: Dict[Tuple[int, int], complex], size: int) -> SparseMatrix:
    """Realify a sparse complex matrix given as {(r,c): (re, im)} pairs."""
    out: SparseMatrix = {}
    for (r, c), (re, im) in entries.items():
        re, im = Fraction(re), Fraction(im)
        if re:
            out[r, c] = out.get((r, c), 0) + re
            out[r + size, c + size] = out.get((r + size, c + size), 0) + re
        if im:
            out[r + size, c] = out.get((r + size, c), 0) + im
            out[r, c + size] = out.get((r, c + size), 0) - im
    return {k: v for k, v in out.items() if v}


@dataclass(frozen=True)
class Component:
    label: str
    grade: int
    dim: int


@dataclass(frozen=True, eq=False)
class GradedAlgebra:
    family: str
    params: Tuple[int, ...]
    ambient_size: int
    matrix_size: int
    basis: Tuple[SparseMatrix, ...]
    labels: Tuple[str, ...]
    weights: Tuple[Tuple[int, ...], ...]
    component_order: Tuple[str, ...]
    block_sizes: Tuple[int, ...] = field(default=())

    @property
    def dim(self) -> int:
        return len(self.basis)

    @cached_property
    def grades(self) -> Tuple[int, ...]:
        return tuple(label_grade(lab) for lab in self.labels)

    @cached_property
    def components(self) -> Tuple[Component, ...]:
        return tuple(
            Component(lab, label_grade(lab), self.labels.count(lab))
            for lab in self.component_order
        )

    def indices(self, *labels: str) -> List[int]:
        wanted = set(labels)
        return [i for i, lab in enumerate(self.labels) if lab in wanted]

    def grade_indices(self, *grades: int) -> List[int]:
        wanted = set(grades)
        return [i for i, g in enumerate(self.grades) if g in wanted]

    @property
    def is_complex(self) -> bool:
        return self.family == "cr"

    # -- coordinates -------------------------------------------------------

    @cached_property
    def _dual(self) -> Tuple[Tuple[Tuple[int, int], ...], List[List[Tuple[int, Fraction]]]]:
        flat_index: Dict[Tuple[int, int], int] = {}
        rows = []
        for m in self.basis:
            row = {}
            for key, v in m.items():
                j = flat_index.setdefault(key, len(flat_index))
                row[j] = v
            rows.append(row)
        _, pivots = linalg.rref(rows)
        if len(pivots) != self.dim:
            raise AlgebraError("basis is linearly dependent")
        keys = {j: k for k, j in flat_index.items()}
        pivot_keys = tuple(keys[p] for p in pivots)
        square = [[m.get(k, Fraction(0)) for k in pivot_keys] for m in self.basis]
        inv = linalg.inverse(square)
        return pivot_keys, [[(k, w) for k, w in enumerate(row) if w] for row in inv]

    def coords(self, m: SparseMatrix, check: bool = True) -> Tuple[Fraction, ...]:
        """Exact coordinates of a sparse matrix in the basis."""
        pivot_keys, inv = self._dual
        out = [Fraction(0)] * self.dim
        for a, key in enumerate(pivot_keys):
            v = m.get(key)
            if v:
                for k, w in inv[a]:
                    out[k] += v * w
        if check:
            back = self.matrix_of(out)
            keys = set(back) | {k for k, v in m.items() if v}
            if any(back.get(k, 0) != m.get(k, 0) for k in keys):
                raise AlgebraError("matrix does not lie in the algebra")
        return tuple(out)

    def matrix_of(self, coords: Sequence) -> SparseMatrix:
        out: SparseMatrix = {}
        for c, m in zip(coords, self.basis):
            if c:
                for k, v in m.items():
                    out[k] = out.get(k, 0) + c * v
        return {k: v for k, v in out.items() if v}

    def dense(self, coords: Sequence, dtype=object) -> np.ndarray:
        a = np.zeros((self.matrix_size, self.matrix_size), dtype=dtype)
        for (r, c), v in self.matrix_of(coords).items():
            a[r, c] = v
        return a

    def float_basis(self) -> np.ndarray:
        """Stack of basis matrices as floats, shape (dim, size, size)."""
        out = np.zeros((self.dim, self.matrix_size, self.matrix_size))
        for i, m in enumerate(self.basis):
            for (r, c), v in m.items():
                out[i, r, c] = float(v)
        return out

    @cached_property
    def _float_coord_map(self) -> np.ndarray:
        flat = self.float_basis().reshape(self.dim, -1)
        return np.linalg.pinv(flat)

    def float_coords(self, mat: np.ndarray) -> np.ndarray:
        """Least-squares coordinates of a float matrix (exact on the algebra)."""
        return np.asarray(mat).reshape(-1) @ self._float_coord_map

    # -- brackets -----------------------------------------------------------

    @cached_property
    def structure(self) -> Tuple[Tuple[Dict[int, Fraction], ...], ...]:
        """``structure[i][j]`` is the sparse expansion of ``[e_i, e_j]``."""
        table: List[List[Dict[int, Fraction]]] = [[{} for _ in range(self.dim)] for _ in range(self.dim)]
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                co = self.coords(_commutator(self.basis[i], self.basis[j]))
                d = {k: v for k, v in enumerate(co) if v}
                table[i][j] = d
                table[j][i] = {k: -v for k, v in d.items()}
        return tuple(tuple(r) for r in table)

    def bracket_coords(self, x: Sequence, y: Sequence) -> Tuple[Fraction, ...]:
        out = [Fraction(0)] * self.dim
        sx = [(i, v) for i, v in enumerate(x) if v]
        sy = [(j, w) for j, w in enumerate(y) if w]
        for i, v in sx:
            row = self.structure[i]
            for j, w in sy:
                for k, c in row[j].items():
                    out[k] += v * w * c
        return tuple(out)

    @cached_property
    def integer_structure(self) -> Tuple[np.ndarray, int]:
        """Structure constants cleared of denominators: ``C / D``, ``C`` int64."""
        den = 1
        for row in self.structure:
            for d in row:
                for v in d.values():
                    den = np.lcm(den, v.denominator)
        c = np.zeros((self.dim, self.dim, self.dim), dtype=np.int64)
        for i, row in enumerate(self.structure):
            for j, d in enumerate(row):
                for k, v in d.items():
                    c[i, j, k] = int(v * den)
        return c, int(den)

    def ad_matrix(self, x: Sequence) -> List[List[Fraction]]:
        """Matrix of ``ad(x)`` acting on coordinate columns."""
        cols = [self.bracket_coords(x, e) for e in self.unit_vectors]
        return [list(r) for r in zip(*cols)]

    @cached_property
    def unit_vectors(self) -> Tuple[Tuple[Fraction, ...], ...]:
        z = [Fraction(0)] * self.dim
        out = []
        for i in range(self.dim):
            v = list(z)
            v[i] = Fraction(1)
            out.append(tuple(v))
        return tuple(out)

    # -- forms ----------------------------------------------------------------

    def trace_form_coords(self, x: Sequence, y: Sequence) -> Fraction:
        mx, my = self.matrix_of(x), self.matrix_of(y)
        by_row: Dict[int, List[Tuple[int, Fraction]]] = {}
        for (r, c), v in my.items():
            by_row.setdefault(r, []).append((c, v))
        t = Fraction(0)
        for (r, c), v in mx.items():
            for c2, w in by_row.get(c, ()):
                if c2 == r:
                    t += v * w
        # realified trace is twice the real part of the complex trace
        return t / 2 if self.is_complex else t

    @cached_property
    def trace_gram(self) -> Tuple[Tuple[Fraction, ...], ...]:
        return tuple(
            tuple(self.trace_form_coords(self.unit_vectors[i], self.unit_vectors[j]) for j in range(self.dim))
            for i in range(self.dim)
        )

    @cached_property
    def inner_gram(self) -> Tuple[Tuple[Fraction, ...], ...]:
        """Gram matrix of ``<X, Y> = tr(X Y^t)`` on the basis."""
        out = []
        for a in self.basis:
            row = []
            for b in self.basis:
                s = sum((v * b.get(k, 0) for k, v in a.items()), Fraction(0))
                row.append(s / 2 if self.is_complex else s)
            out.append(tuple(row))
        return tuple(out)

    # -- misc -------------------------------------------------------------------

    def element(self, coords: Sequence) -> "AlgebraElement":
        if len(coords) != self.dim:
            raise AlgebraError(f"expected {self.dim} coordinates, got {len(coords)}")
        return AlgebraElement(self, tuple(Fraction(c) for c in coords))

    def from_matrix(self, m) -> "AlgebraElement":
        """Element from a dense or sparse matrix (realified for cr)."""
        if not isinstance(m, dict):
            m = {(r, c): Fraction(v) for (r, c), v in np.ndenumerate(np.asarray(m, dtype=object)) if v != 0}
        return AlgebraElement(self, self.coords(m))

    def basis_element(self, i: int) -> "AlgebraElement":
        return AlgebraElement(self, self.unit_vectors[i])

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, (Fraction(0),) * self.dim)

    def descriptor(self) -> dict:
        return {
            "family": self.family,
            "parameters": list(self.params),
            "dimension": self.dim,
            "components": [{"label": c.label, "dim": c.dim} for c in self.components],
        }

    def __repr__(self) -> str:
        return f"GradedAlgebra({self.family}{self.params}, dim={self.dim})"


@dataclass(frozen=True)
class AlgebraElement:
    algebra: GradedAlgebra
    coords: Tuple

    def _check(self, other: "AlgebraElement") -> None:
        if other.algebra is not self.algebra:
            raise AlgebraError("elements belong to different algebras")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.algebra, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.algebra, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, tuple(-a for a in self.coords))

    def __mul__(self, s) -> "AlgebraElement":
        return AlgebraElement(self.algebra, tuple(s * a for a in self.coords))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coords)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, (int, Fraction)) for c in self.coords)

    def matrix(self) -> SparseMatrix:
        return self.algebra.matrix_of(self.coords)

    def dense(self) -> np.ndarray:
        if self.is_exact:
            return self.algebra.dense(self.coords)
        return np.tensordot(np.asarray(self.coords, dtype=float), self.algebra.float_basis(), axes=1)

    def support_labels(self) -> set:
        return {self.algebra.labels[i] for i, c in enumerate(self.coords) if c}


def build_algebra(family: str, *params: int) -> GradedAlgebra:
    """Construct one of the three graded algebra families.

    >>> build_algebra("lagrangean", 1).dim
    8
    """
    if family == "lagrangean":
        (n,) = params
        if n < 1:
            raise AlgebraError("lagrangean grading needs n >= 1")
        return _three_block(family, (n,), (1, n, 1), LAGRANGEAN_LABELS, "LR")
    if family == "path":
        (m,) = params
        if m < 2:
            raise AlgebraError("path grading needs m >= 2")
        return _three_block(family, (m,), (1, 1, m), PATH_LABELS, "EV")
    if family == "cr":
        p, q = params
        if p < 0 or q < 0 or p + q < 1:
            raise AlgebraError("cr grading needs p, q >= 0 and p+q >= 1")
        return _cr(p, q)
    raise AlgebraError(f"unknown family {family!r}")


def _three_block(family, params, blocks, labels, tags) -> GradedAlgebra:
    size = sum(blocks)
    block_of = []
    for b, s in enumerate(blocks):
        block_of += [b] * s
    first, second = tags

    def label(r, c):
        br, bc = block_of[r], block_of[c]
        g = bc - br
        if g == 0:
            return "g0"
        if abs(g) == 2:
            return "g2" if g > 0 else "g-2"
        if g == 1:
            return "g1" + (first if br == 0 else second)
        return "g-1" + (first if bc == 0 else second)

    entries = []
    for r in range(size):
        for c in range(size):
            if r == c:
                if r == size - 1:
                    continue
                m = {(r, r): Fraction(1), (r + 1, r + 1): Fraction(-1)}
                w = (0,) * size
            else:
                m = {(r, c): Fraction(1)}
                w = tuple((k == r) - (k == c) for k in range(size))
            lab = label(r, c)
            entries.append((label_grade(lab), r, c, m, lab, w))
    entries.sort(key=lambda e: (e[0], e[1], e[2]))
    return GradedAlgebra(
        family=family,
        params=params,
        ambient_size=size,
        matrix_size=size,
        basis=tuple(e[3] for e in entries),
        labels=tuple(e[4] for e in entries),
        weights=tuple(e[5] for e in entries),
        component_order=labels,
        block_sizes=blocks,
    )


def signature_matrix(p: int, q: int) -> List[int]:
    return [1] * p + [-1] * q


def hermitian_gram(p: int, q: int) -> np.ndarray:
    """Gram matrix of z0*conj(z_{n+1}) + z_{n+1}*conj(z0) + sum_p |z|^2 - sum_q |z|^2."""
    n = p + q
    g = np.zeros((n + 2, n + 2), dtype=int)
    g[0, n + 1] = g[n + 1, 0] = 1
    for j, s in enumerate(signature_matrix(p, q)):
        g[1 + j, 1 + j] = s
    return g


def _cr(p: int, q: int) -> GradedAlgebra:
    n = p + q
    N = n + 2
    sig = signature_matrix(p, q)
    last = n + 1
    items = []  # (label, complex entries)
    # grade -2: i x at (last, 0)
    items.append(("g-2", {(last, 0): (0, 1)}))
    # grade -1: X in C^n at (j, 0), -X^* I at (last, j)
    for j in range(n):
        items.append(("g-1", {(1 + j, 0): (1, 0), (last, 1 + j): (-sig[j], 0)}))
    for j in range(n):
        items.append(("g-1", {(1 + j, 0): (0, 1), (last, 1 + j): (0, sig[j])}))
    # grade 0: w real, w imaginary (compensated in A), A in u(p,q) trace free
    items.append(("g0", {(0, 0): (1, 0), (last, last): (-1, 0)}))
    items.append(("g0", {(0, 0): (0, 1), (last, last): (0, 1), (1, 1): (0, -2)}))
    for j in range(n - 1):
        items.append(("g0", {(1 + j, 1 + j): (0, 1), (2 + j, 2 + j): (0, -1)}))
    # A = I K with K anti-Hermitian off-diagonal
    for j, k in itertools.combinations(range(n), 2):
        items.append(("g0", {(1 + j, 1 + k): (sig[j], 0), (1 + k, 1 + j): (-sig[k], 0)}))
        items.append(("g0", {(1 + j, 1 + k): (0, sig[j]), (1 + k, 1 + j): (0, sig[k])}))
    # grade 1: Z in C^{n*} at (0, j), -I Z^* at (j, last)
    for j in range(n):
        items.append(("g1", {(0, 1 + j): (1, 0), (1 + j, last): (-sig[j], 0)}))
    for j in range(n):
        items.append(("g1", {(0, 1 + j): (0, 1), (1 + j, last): (0, sig[j])}))
    items.append(("g2", {(0, last): (0, 1)}))
    return GradedAlgebra(
        family="cr",
        params=(p, q),
        ambient_size=N,
        matrix_size=2 * N,
        basis=tuple(_realify(e, N) for _, e in items),
        labels=tuple(lab for lab, _ in items),
        weights=tuple((label_grade(lab),) for lab, _ in items),
        component_order=CR_LABELS,
        block_sizes=(1, n, 1),
    )


def complex_blocks(alg: GradedAlgebra, coords: Sequence) -> Tuple[np.ndarray, np.ndarray]:
    """Real and imaginary parts (object arrays) of a cr element's complex matrix."""
    d = alg.dense(coords)
    N = alg.ambient_size
    return d[:N, :N], d[N:, :N]


def _same_algebra(x: AlgebraElement, y: AlgebraElement) -> GradedAlgebra:
    if x.algebra is not y.algebra:
        raise AlgebraError("elements belong to different algebras")
    return x.algebra


def bracket(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    alg = _same_algebra(x, y)
    return AlgebraElement(alg, alg.bracket_coords(x.coords, y.coords))


def trace_form(x: AlgebraElement, y: AlgebraElement) -> Fraction:
    """tr(XY); for cr this is the real part of the complex trace."""
    alg = _same_algebra(x, y)
    return alg.trace_form_coords(x.coords, y.coords)


def grade_split(x: AlgebraElement) -> Dict[str, AlgebraElement]:
    """Components of ``x`` keyed by label, in the algebra's label order."""
    alg = x.algebra
    out = {}
    for lab in alg.component_order:
        idx = set(alg.indices(lab))
        out[lab] = AlgebraElement(
            alg, tuple(c if i in idx else c * 0 for i, c in enumerate(x.coords))
        )
    return out


def levi_matrix(alg: GradedAlgebra) -> List[List[Fraction]]:
    """Matrix of the bracket g_{-1} x g_{-1} -> g_{-2} (g_{-2} coordinate 0 for cr
    and lagrangean, which have one-dimensional g_{-2})."""
    minus1 = alg.grade_indices(-1)
    (top,) = alg.grade_indices(-2)
    return [[alg.structure[i][j].get(top, Fraction(0)) for j in minus1] for i in minus1]


def hermitian_defect(alg: GradedAlgebra, coords: Sequence) -> np.ndarray:
    """X^* J + J X for a cr element, as an exact object array (complex parts stacked)."""
    re, im = complex_blocks(alg, coords)
    gram = hermitian_gram(*alg.params).astype(object)
    # (re - i im)^T J + J (re + i im)
    real = re.T.dot(gram) + gram.dot(re)
    imag = -im.T.dot(gram) + gram.dot(im)
    return np.stack([real, imag])


# -- structure checks ---------------------------------------------------------------


def _sparse_integer_structure(alg: GradedAlgebra) -> Tuple[List[List[Dict[int, int]]], int]:
    c, den = alg.integer_structure
    table = [[{} for _ in range(alg.dim)] for _ in range(alg.dim)]
    for i, j, k in zip(*np.nonzero(c)):
        table[i][j][int(k)] = int(c[i, j, k])
    return table, den


def jacobi_defect(alg: GradedAlgebra) -> int:
    """Number of basis triples violating the Jacobi identity (exact, integer arithmetic)."""
    s, _ = _sparse_integer_structure(alg)

    def double(i, j, k, acc):
        for m, v in s[i][j].items():
            for l, w in s[m][k].items():
                acc[l] = acc.get(l, 0) + v * w

    bad = 0
    for i in range(alg.dim):
        for j in range(i + 1, alg.dim):
            for k in range(j + 1, alg.dim):
                acc: Dict[int, int] = {}
                double(i, j, k, acc)
                double(j, k, i, acc)
                double(k, i, j, acc)
                if any(acc.values()):
                    bad += 1
    return bad


def grading_defect(alg: GradedAlgebra) -> int:
    """Number of basis brackets [e_i, e_j] with a term outside g_{gr(i)+gr(j)}."""
    grades = alg.grades
    bad = 0
    for i in range(alg.dim):
        for j in range(alg.dim):
            target = grades[i] + grades[j]
            if any(grades[k] != target for k in alg.structure[i][j]):
                bad += 1
    return bad


def levi_nondegenerate(alg: GradedAlgebra) -> bool:
    """Nondegeneracy of the bracket g_-1 x g_-1 -> g_-2.

    For contact gradings (dim g_-2 = 1) this is invertibility of the Levi
    matrix; for the path grading the bracket of the two g_-1 parts must map
    onto g_-2.
    """
    minus1 = alg.grade_indices(-1)
    minus2 = alg.grade_indices(-2)
    if len(minus2) == 1:
        return linalg.rank(linalg.sparse_rows(levi_matrix(alg))) == len(minus1)
    rows = []
    for i in minus1:
        for j in minus1:
            d = alg.structure[i][j]
            row = {a: d[k] for a, k in enumerate(minus2) if d.get(k)}
            if row:
                rows.append(row)
    return linalg.rank(rows) == len(minus2)


def isotropic_splitting(alg: GradedAlgebra) -> bool:
    """Whether each of the two g_-1 parts brackets to zero with itself."""
    parts = [lab for lab in alg.component_order if alg.grades[alg.labels.index(lab)] == -1]
    if len(parts) != 2:
        raise AlgebraError("the grading has no splitting of g_-1")
    for lab in parts:
        idx = alg.indices(lab)
        for i in idx:
            for j in idx:
                if alg.structure[i][j]:
                    return False
    return True
