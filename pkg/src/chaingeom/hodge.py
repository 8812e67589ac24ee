"""Cochains on g_- with values in g, the Kostant codifferential and Laplacian.

A cochain of degree l is stored by its values on sorted l-tuples of basis
elements of g_- (the negative-grade part of the basis).  Through the exact
trace-dual basis ``f^a`` of p_+ (``tr(f^a e_b) = delta_ab``) the same
coordinates describe ``Lambda^l p_+ (x) g``: the key ``((a1, ..., al), k)``
is ``f^a1 ^ ... ^ f^al (x) e_k``.  Both operators, ``codifferential``
(homology of p_+) and ``differential`` (cohomology of g_-), act on these
coordinates, and everything is exact.

All operators commute with the adjoint action of the diagonal torus, so
matrices are assembled one torus weight at a time.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from . import linalg
from .graded_lie import GradedAlgebra, dual_label

Key = Tuple[Tuple[int, ...], int]

INFINITY = math.inf


class CochainError(ValueError):
    pass


def _clean(d: Mapping) -> Dict:
    return {k: v for k, v in d.items() if v}


def _insert_sorted(c: int, rest: Tuple[int, ...]) -> Tuple[int, Optional[Tuple[int, ...]]]:
    """Sign and sorted tuple of ``c ^ rest`` (rest sorted); (0, None) on repeats."""
    if c in rest:
        return 0, None
    pos = sum(1 for r in rest if r < c)
    return (-1) ** pos, rest[:pos] + (c,) + rest[pos:]


@dataclass(frozen=True, eq=False)
class CochainMap:
    """Alternating map Lambda^degree(g_-) -> g with exact coefficients."""

    algebra: GradedAlgebra
    degree: int
    coeffs: Mapping[Key, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _clean(self.coeffs))

    def _check(self, other: "CochainMap") -> None:
        if other.algebra is not self.algebra or other.degree != self.degree:
            raise CochainError("cochains live in different spaces")

    def __add__(self, other: "CochainMap") -> "CochainMap":
        self._check(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return CochainMap(self.algebra, self.degree, out)

    def __sub__(self, other: "CochainMap") -> "CochainMap":
        return self + (-other)

    def __neg__(self) -> "CochainMap":
        return CochainMap(self.algebra, self.degree, {k: -v for k, v in self.coeffs.items()})

    def __mul__(self, s) -> "CochainMap":
        return CochainMap(self.algebra, self.degree, {k: s * v for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, CochainMap):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.coeffs

    def value(self, args: Sequence[int]) -> Dict[int, Fraction]:
        """phi(e_{args[0]}, ..., e_{args[-1]}) as a sparse coordinate dict."""
        if len(args) != self.degree:
            raise CochainError("wrong number of arguments")
        if len(set(args)) < len(args):
            return {}
        order = sorted(range(len(args)), key=lambda i: args[i])
        sign = _permutation_sign(order)
        a = tuple(args[i] for i in order)
        out = {}
        for (key, k), v in self.coeffs.items():
            if key == a:
                out[k] = sign * v
        return out

    def homogeneous_parts(self) -> Dict[int, "CochainMap"]:
        cx = complex_for(self.algebra)
        parts: Dict[int, Dict[Key, Fraction]] = defaultdict(dict)
        for key, v in self.coeffs.items():
            parts[cx.homogeneity(key)][key] = v
        return {h: CochainMap(self.algebra, self.degree, d) for h, d in sorted(parts.items())}

    def containers(self) -> set:
        cx = complex_for(self.algebra)
        return {cx.container(key) for key in self.coeffs}

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "terms": [
                {"arguments": list(a), "value_index": k, "coefficient": str(v)}
                for (a, k), v in sorted(self.coeffs.items())
            ],
        }


def _permutation_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


class CochainComplex:
    """Codifferential, differential and Laplacian for one graded algebra."""

    def __init__(self, alg: GradedAlgebra):
        self.algebra = alg
        self.minus = tuple(alg.grade_indices(-2, -1))
        self._minus_set = frozenset(self.minus)
        self._codiff_cache: Dict[Key, Dict[Key, Fraction]] = {}
        self._diff_cache: Dict[Key, Dict[Key, Fraction]] = {}

    # -- dual basis of p_+ ------------------------------------------------------

    @cached_property
    def dual_basis(self) -> Dict[int, Tuple[Fraction, ...]]:
        """Coordinates of f^a in p_+ for each a in g_-."""
        alg = self.algebra
        inv = linalg.inverse(alg.trace_gram)
        return {a: tuple(inv[a]) for a in self.minus}

    def dual_coords(self, z: Sequence) -> Dict[int, Fraction]:
        """Expansion of an element of p_+ in the f-basis: coefficient tr(z e_a)."""
        gram = self.algebra.trace_gram
        out = {}
        for a in self.minus:
            s = sum((z[j] * gram[j][a] for j in range(len(z)) if z[j]), Fraction(0))
            if s:
                out[a] = s
        return out

    @cached_property
    def _f_bracket(self) -> Dict[Tuple[int, int], Dict[int, Fraction]]:
        alg = self.algebra
        out = {}
        for a, b in combinations(self.minus, 2):
            z = alg.bracket_coords(self.dual_basis[a], self.dual_basis[b])
            out[a, b] = self.dual_coords(z)
            out[b, a] = {c: -v for c, v in out[a, b].items()}
        return out

    @cached_property
    def _f_action(self) -> Dict[Tuple[int, int], Dict[int, Fraction]]:
        alg = self.algebra
        out = {}
        for a in self.minus:
            fa = self.dual_basis[a]
            for k in range(alg.dim):
                d = alg.bracket_coords(fa, alg.unit_vectors[k])
                out[a, k] = {m: v for m, v in enumerate(d) if v}
        return out

    @cached_property
    def _minus_bracket_into(self) -> Dict[int, List[Tuple[int, int, Fraction]]]:
        """For each c in g_-: all (x, y, s) with x < y and [e_x, e_y] containing s e_c."""
        alg = self.algebra
        out: Dict[int, List[Tuple[int, int, Fraction]]] = defaultdict(list)
        for x, y in combinations(self.minus, 2):
            for c, s in alg.structure[x][y].items():
                out[c].append((x, y, s))
        return out

    # -- bookkeeping ---------------------------------------------------------------

    def keys(self, degree: int) -> List[Key]:
        return [(a, k) for a in combinations(self.minus, degree) for k in range(self.algebra.dim)]

    def weight(self, key: Key) -> Tuple[int, ...]:
        a, k = key
        w = list(self.algebra.weights[k])
        for i in a:
            for j, v in enumerate(self.algebra.weights[i]):
                w[j] -= v
        return tuple(w)

    def homogeneity(self, key: Key) -> int:
        a, k = key
        g = self.algebra.grades
        return g[k] - sum(g[i] for i in a)

    def container(self, key: Key) -> str:
        """Label such as ``g1L^g2 (x) g0``: components of the f's and of the value."""
        a, k = key
        alg = self.algebra
        order = {lab: i for i, lab in enumerate(alg.component_order)}
        labs = sorted((dual_label(alg.labels[i]) for i in a), key=order.__getitem__)
        return "^".join(labs) + " (x) " + alg.labels[k]

    @lru_cache(maxsize=None)
    def blocks(self, degree: int) -> Dict[Tuple[int, ...], List[Key]]:
        out: Dict[Tuple[int, ...], List[Key]] = defaultdict(list)
        for key in self.keys(degree):
            out[self.weight(key)].append(key)
        return dict(out)

    # -- operators on basis keys -----------------------------------------------------

    def codiff_key(self, key: Key, part: int = 0) -> Dict[Key, Fraction]:
        """Image of one basis tensor under d* (part 1 or 2 selects a summand)."""
        if part == 0 and key in self._codiff_cache:
            return self._codiff_cache[key]
        a, k = key
        out: Dict[Key, Fraction] = defaultdict(Fraction)
        if part in (0, 1):
            for i, ai in enumerate(a):
                rest = a[:i] + a[i + 1:]
                sign = (-1) ** (i + 1)
                for m, v in self._f_action[ai, k].items():
                    out[rest, m] += sign * v
        if part in (0, 2):
            for i, j in combinations(range(len(a)), 2):
                sign = (-1) ** (i + j)
                rest = tuple(x for t, x in enumerate(a) if t not in (i, j))
                for c, v in self._f_bracket[a[i], a[j]].items():
                    s, new = _insert_sorted(c, rest)
                    if s:
                        out[new, k] += sign * s * v
        res = _clean(out)
        if part == 0:
            self._codiff_cache[key] = res
        return res

    def diff_key(self, key: Key) -> Dict[Key, Fraction]:
        """Image of one basis cochain under the Chevalley-Eilenberg differential."""
        if key in self._diff_cache:
            return self._diff_cache[key]
        alg = self.algebra
        a, k = key
        out: Dict[Key, Fraction] = defaultdict(Fraction)
        aset = set(a)
        for x in self.minus:
            if x in aset:
                continue
            s, b = _insert_sorted(x, a)
            i = b.index(x)
            for m, v in alg.structure[x][k].items():
                out[b, m] += (-1) ** i * v
        for p, c in enumerate(a):
            rest = a[:p] + a[p + 1:]
            rset = set(rest)
            for x, y, s in self._minus_bracket_into.get(c, ()):
                if x in rset or y in rset:
                    continue
                b = tuple(sorted(rest + (x, y)))
                i, j = b.index(x), b.index(y)
                out[b, k] += (-1) ** (i + j + p) * s
        res = _clean(out)
        self._diff_cache[key] = res
        return res

    def _apply(self, fn, c: CochainMap, degree: int) -> CochainMap:
        out: Dict[Key, Fraction] = defaultdict(Fraction)
        for key, v in c.coeffs.items():
            for k2, w in fn(key).items():
                out[k2] += v * w
        return CochainMap(self.algebra, degree, out)

    def codifferential(self, c: CochainMap, part: int = 0) -> CochainMap:
        if c.degree < 1 or c.degree > 3:
            raise CochainError("codifferential supports degrees 1 to 3")
        return self._apply(lambda key: self.codiff_key(key, part), c, c.degree - 1)

    def differential(self, c: CochainMap) -> CochainMap:
        if c.degree < 0 or c.degree > 2:
            raise CochainError("differential supports degrees 0 to 2")
        return self._apply(self.diff_key, c, c.degree + 1)

    def laplacian_key(self, key: Key) -> Dict[Key, Fraction]:
        out: Dict[Key, Fraction] = defaultdict(Fraction)
        for k2, v in self.diff_key(key).items():
            for k3, w in self.codiff_key(k2).items():
                out[k3] += v * w
        if len(key[0]) > 0:
            for k2, v in self.codiff_key(key).items():
                for k3, w in self.diff_key(k2).items():
                    out[k3] += v * w
        return _clean(out)

    def laplacian(self, c: CochainMap) -> CochainMap:
        if c.degree != 2:
            raise CochainError("laplacian is implemented in degree 2")
        return self._apply(self.laplacian_key, c, 2)

    # -- matrices per weight block -------------------------------------------------------

    def block_matrix(self, fn, source: Sequence[Key], target: Sequence[Key]) -> List[Dict[int, Fraction]]:
        """Sparse rows of the matrix of ``fn`` from ``source`` to ``target`` keys."""
        index = {k: i for i, k in enumerate(target)}
        rows: List[Dict[int, Fraction]] = [dict() for _ in target]
        for j, key in enumerate(source):
            for k2, v in fn(key).items():
                try:
                    rows[index[k2]][j] = v
                except KeyError:
                    raise CochainError("operator leaves the weight block") from None
        return rows

    @lru_cache(maxsize=None)
    def harmonic_block(self, weight: Tuple[int, ...]) -> List[CochainMap]:
        keys = self.blocks(2)[weight]
        rows = self.block_matrix(self.laplacian_key, keys, keys)
        null = linalg.nullspace(rows, len(keys))
        return [CochainMap(self.algebra, 2, {keys[i]: v for i, v in vec.items()}) for vec in null]

    def harmonic_vectors(self) -> List[CochainMap]:
        out = []
        for w in self.blocks(2):
            out.extend(self.harmonic_block(w))
        return out

    def block_ranks(self, weight: Tuple[int, ...]) -> Dict[str, int]:
        """Ranks of d (1->2), d* (3->2) restricted to one weight block, and dims."""
        b1 = self.blocks(1).get(weight, [])
        b2 = self.blocks(2).get(weight, [])
        b3 = self.blocks(3).get(weight, []) if len(self.minus) >= 3 else []
        d1 = linalg.rank(self.block_matrix(self.diff_key, b1, b2)) if b1 and b2 else 0
        cd3 = linalg.rank(self.block_matrix(self.codiff_key, b3, b2)) if b3 and b2 else 0
        return {"dim": len(b2), "im_d": d1, "im_codiff": cd3, "harmonic": len(self.harmonic_block(weight)) if b2 else 0}

    # -- inner product -------------------------------------------------------------

    @cached_property
    def _f_gram(self) -> Dict[Tuple[int, int], Fraction]:
        """<f^a, f^b> = tr(f^a (f^b)^t) for a, b in g_-."""
        alg = self.algebra
        g = alg.inner_gram
        out = {}
        for a in self.minus:
            fa = self.dual_basis[a]
            for b in self.minus:
                fb = self.dual_basis[b]
                s = Fraction(0)
                for i, x in enumerate(fa):
                    if x:
                        for j, y in enumerate(fb):
                            if y:
                                s += x * y * g[i][j]
                out[a, b] = s
        return out

    def inner_key(self, k1: Key, k2: Key) -> Fraction:
        (a, i), (b, j) = k1, k2
        g = self.algebra.inner_gram[i][j]
        if not g:
            return Fraction(0)
        mat = [[self._f_gram[x, y] for y in b] for x in a]
        return _det(mat) * g

    def inner(self, c1: CochainMap, c2: CochainMap) -> Fraction:
        return sum((v * w * self.inner_key(k1, k2) for k1, v in c1.coeffs.items() for k2, w in c2.coeffs.items()), Fraction(0))


def _det(m: List[List[Fraction]]) -> Fraction:
    n = len(m)
    if n == 0:
        return Fraction(1)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    return sum(((-1) ** j * m[0][j] * _det([row[:j] + row[j + 1:] for row in m[1:]]) for j in range(n) if m[0][j]), Fraction(0))


@lru_cache(maxsize=None)
def complex_for(alg: GradedAlgebra) -> CochainComplex:
    return CochainComplex(alg)


# -- module-level operations ------------------------------------------------------------


def basis_cochain(alg: GradedAlgebra, key: Key, coeff=Fraction(1)) -> CochainMap:
    return CochainMap(alg, len(key[0]), {key: Fraction(coeff)})


def codifferential(c: CochainMap) -> CochainMap:
    return complex_for(c.algebra).codifferential(c)


def codifferential_split(c: CochainMap) -> Tuple[CochainMap, CochainMap]:
    """The two summands of d*: the module-action part and the bracket part."""
    cx = complex_for(c.algebra)
    return cx.codifferential(c, 1), cx.codifferential(c, 2)


def differential(c: CochainMap) -> CochainMap:
    return complex_for(c.algebra).differential(c)


def laplacian(c: CochainMap) -> CochainMap:
    return complex_for(c.algebra).laplacian(c)


@dataclass
class HarmonicComponent:
    homogeneity: int
    container: str
    vectors: List[CochainMap]

    @property
    def dimension(self) -> int:
        return len(self.vectors)


@dataclass
class HarmonicBasis:
    algebra: GradedAlgebra
    degree: int
    components: List[HarmonicComponent]
    total_dim: int
    cochain_dim: int
    laplacian_rank: int

    @property
    def vectors(self) -> List[CochainMap]:
        return [v for c in self.components for v in c.vectors]

    def homogeneity_of(self, v: CochainMap) -> int:
        (h,) = v.homogeneous_parts().keys()
        return h

    def container_of(self, v: CochainMap) -> str:
        (c,) = v.containers()
        return c

    def table(self) -> List[dict]:
        return [
            {"homogeneity": c.homogeneity, "container_label": c.container, "dimension": c.dimension}
            for c in self.components
        ]


def _intersect_with_container(vectors: List[CochainMap], inside: Iterable[Key]) -> List[CochainMap]:
    """Basis of span(vectors) intersected with the coordinate subspace ``inside``."""
    inside = set(inside)
    outside = sorted({k for v in vectors for k in v.coeffs if k not in inside})
    if not outside:
        return list(vectors)
    rows = [{j: v.coeffs[k] for j, v in enumerate(vectors) if k in v.coeffs} for k in outside]
    null = linalg.nullspace(rows, len(vectors))
    out = []
    for comb in null:
        total = CochainMap(vectors[0].algebra, 2, {})
        for j, s in comb.items():
            total = total + vectors[j] * s
        out.append(total)
    return out


def harmonic_kernel(alg: GradedAlgebra) -> HarmonicBasis:
    """Exact kernel of the Laplacian in degree 2, split by homogeneity and container."""
    cx = complex_for(alg)
    groups: Dict[Tuple[int, str], List[CochainMap]] = defaultdict(list)
    total = 0
    for w, keys in cx.blocks(2).items():
        vecs = cx.harmonic_block(w)
        if not vecs:
            continue
        total += len(vecs)
        by_container: Dict[str, List[Key]] = defaultdict(list)
        for k in keys:
            by_container[cx.container(k)].append(k)
        found = 0
        for label, ks in by_container.items():
            part = _intersect_with_container(vecs, ks)
            for v in part:
                groups[cx.homogeneity(ks[0]), label].append(v)
            found += len(part)
        if found != len(vecs):
            raise CochainError(f"harmonic vectors in weight {w} are not container-pure")
    comps = [HarmonicComponent(h, lab, vs) for (h, lab), vs in sorted(groups.items(), key=lambda t: (-t[0][0], t[0][1]))]
    ndim = len(cx.keys(2))
    return HarmonicBasis(alg, 2, comps, total, ndim, ndim - total)


# -- predicates ---------------------------------------------------------------------


def min_homogeneity(c: CochainMap) -> float:
    cx = complex_for(c.algebra)
    return min((cx.homogeneity(k) for k in c.coeffs), default=INFINITY)


def is_regular(c: CochainMap) -> bool:
    return min_homogeneity(c) > 0


def is_normal(c: CochainMap) -> bool:
    return codifferential(c).is_zero()


def is_torsion_free(c: CochainMap) -> bool:
    grades = c.algebra.grades
    return all(grades[k] >= 0 for (_, k) in c.coeffs)


def predicates(c: CochainMap) -> Dict[str, object]:
    return {
        "regular": is_regular(c),
        "normal": is_normal(c),
        "torsion_free": is_torsion_free(c),
        "min_homogeneity": min_homogeneity(c),
    }


# -- projections for the path algebra ------------------------------------------------


def project_pi(c: CochainMap) -> Dict[str, CochainMap]:
    """Split a path-algebra cochain supported in p~_+ ^ g~_2 (x) g~ by the g~_1 type.

    Every term must contain an f from g~_2 (an argument in g~_-2).  Terms with
    two such arguments belong to Lambda^2 g~_2 and are dropped by both
    projections; the rest go to ``piE`` or ``piV`` according to whether the
    other f lies in g~_1^E or g~_1^V.
    """
    alg = c.algebra
    if alg.family != "path":
        raise CochainError("projections are defined on the path algebra")
    labels = alg.labels
    e_part, v_part = {}, {}
    for key, val in c.coeffs.items():
        a, _ = key
        labs = [labels[i] for i in a]
        if "g-2" not in labs:
            raise CochainError("cochain is not supported in p_+ ^ g_2 (x) g")
        other = [lab for lab in labs if lab != "g-2"]
        if not other:
            continue
        if other == ["g-1E"]:
            e_part[key] = val
        else:
            v_part[key] = val
    return {"piE": CochainMap(alg, c.degree, e_part), "piV": CochainMap(alg, c.degree, v_part)}


def harmonic_project(c: CochainMap) -> Dict[str, CochainMap]:
    """Harmonic representative of the homology class of ``c`` (``d* c = 0``).

    Solves ``c = d* beta + h`` with ``h`` harmonic, blockwise.  The result is
    returned whole and split into the parts coming from E- and V-type
    containers (those whose p_+ factor involves g_1^E resp. g_1^V; others go
    to ``rest``).
    """
    alg = c.algebra
    cx = complex_for(alg)
    if not codifferential(c).is_zero():
        raise CochainError("cochain is not in the kernel of the codifferential")
    by_weight: Dict[Tuple[int, ...], Dict[Key, Fraction]] = defaultdict(dict)
    for k, v in c.coeffs.items():
        by_weight[cx.weight(k)][k] = v
    result: Dict[Key, Fraction] = {}
    for w, part in by_weight.items():
        keys = cx.blocks(2)[w]
        idx = {k: i for i, k in enumerate(keys)}
        harm = cx.harmonic_block(w)
        src = cx.blocks(3).get(w, []) if len(cx.minus) >= 3 else []
        # unknowns: coefficients of d*(basis of degree 3) and of harmonic vectors
        cols = [cx.codiff_key(k) for k in src] + [h.coeffs for h in harm]
        rows: List[Dict[int, Fraction]] = [dict() for _ in keys]
        for j, col in enumerate(cols):
            for k, v in col.items():
                rows[idx[k]][j] = v
        rhs = [part.get(k, 0) for k in keys]
        sol = linalg.solve(rows, rhs, len(cols))
        for t, h in enumerate(harm):
            s = sol[len(src) + t]
            if s:
                for k, v in h.coeffs.items():
                    result[k] = result.get(k, 0) + s * v
    total = CochainMap(alg, 2, result)
    split = {"E": {}, "V": {}, "rest": {}}
    for k, v in total.coeffs.items():
        lab = cx.container(k)
        kind = "E" if "g1E" in lab.split(" (x) ")[0] else "V" if "g1V" in lab.split(" (x) ")[0] else "rest"
        split[kind][k] = v
    return {"harmonic": total, **{name: CochainMap(alg, 2, d) for name, d in split.items()}}


def hat_p_indices(alg: GradedAlgebra) -> List[int]:
    """Basis indices spanning g_1 + g_2 (the rest of p-hat is handled separately)."""
    return alg.grade_indices(1, 2)


def hat_p_basis(alg: GradedAlgebra) -> List[Tuple[Fraction, ...]]:
    """Basis of the subspace of p with zero corner diagonal entries.

    For the lagrangean algebra this is p_+ plus the trace-free middle block of
    g_0, i.e. matrices ((0, u, d), (0, B, v), (0, 0, 0)).
    """
    if alg.family != "lagrangean":
        raise CochainError("p-hat is defined for the lagrangean algebra")
    out = [alg.unit_vectors[i] for i in hat_p_indices(alg)]
    n = alg.ambient_size - 2
    # trace-free middle block: off-diagonal E_ij and E_ii - E_jj within 1..n
    for r in range(1, n + 1):
        for c in range(1, n + 1):
            if r != c:
                out.append(alg.coords({(r, c): Fraction(1)}))
    for r in range(1, n):
        out.append(alg.coords({(r, r): Fraction(1), (r + 1, r + 1): Fraction(-1)}))
    return out
