"""Exact linear algebra over the rationals.

Matrices are handled as lists of sparse rows, each row a ``dict`` mapping a
column index to a nonzero :class:`fractions.Fraction`.  Dense input (lists of
lists) is accepted by :func:`sparse_rows`.  All routines are exact; nothing
here ever touches floating point.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Tuple

SparseRow = Dict[int, Fraction]


def sparse_rows(dense: Iterable[Sequence]) -> List[SparseRow]:
    rows = []
    for row in dense:
        rows.append({j: Fraction(v) for j, v in enumerate(row) if v != 0})
    return rows


def _axpy(target: SparseRow, factor: Fraction, source: SparseRow) -> None:
    # target += factor * source, dropping cancelled entries
    for j, v in source.items():
        w = target.get(j, 0) + factor * v
        if w:
            target[j] = w
        else:
            target.pop(j, None)


def rref(rows: Sequence[SparseRow]) -> Tuple[List[SparseRow], List[int]]:
    """Reduced row echelon form.

    Returns the nonzero reduced rows (each normalized to pivot 1) and the list
    of pivot columns, in matching order.
    """
    work = [dict(r) for r in rows if r]
    pivots: List[int] = []
    reduced: List[SparseRow] = []
    while work:
        # pick the row with the smallest leading column; ties by sparsity
        best = min(range(len(work)), key=lambda i: (min(work[i]), len(work[i])))
        row = work.pop(best)
        col = min(row)
        inv = 1 / row[col]
        row = {j: v * inv for j, v in row.items()}
        nxt = []
        for other in work:
            f = other.get(col)
            if f:
                _axpy(other, -f, row)
            if other:
                nxt.append(other)
        work = nxt
        for prev in reduced:
            f = prev.get(col)
            if f:
                _axpy(prev, -f, row)
        reduced.append(row)
        pivots.append(col)
    order = sorted(range(len(pivots)), key=pivots.__getitem__)
    return [reduced[i] for i in order], [pivots[i] for i in order]


def rank(rows: Sequence[SparseRow]) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[SparseRow], ncols: int) -> List[SparseRow]:
    """Basis of ``{v : M v = 0}`` as sparse vectors, one per free column."""
    red, pivots = rref(rows)
    pivset = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivset:
            continue
        vec: SparseRow = {free: Fraction(1)}
        for row, p in zip(red, pivots):
            v = row.get(free)
            if v:
                vec[p] = -v
        basis.append(vec)
    return basis


def transpose(rows: Sequence[SparseRow]) -> List[SparseRow]:
    cols: Dict[int, SparseRow] = {}
    for i, row in enumerate(rows):
        for j, v in row.items():
            cols.setdefault(j, {})[i] = v
    if not cols:
        return []
    return [cols.get(j, {}) for j in range(max(cols) + 1)]


def solve(rows: Sequence[SparseRow], rhs: Sequence, ncols: int) -> List[Fraction]:
    """One exact solution of ``M x = b``; raises ``ValueError`` if inconsistent."""
    aug = []
    for row, b in zip(rows, rhs):
        r = dict(row)
        if b:
            r[ncols] = Fraction(b)
        aug.append(r)
    red, pivots = rref(aug)
    if pivots and pivots[-1] == ncols:
        raise ValueError("inconsistent linear system")
    x = [Fraction(0)] * ncols
    for row, p in zip(red, pivots):
        x[p] = row.get(ncols, Fraction(0))
    return x


def inverse(dense: Sequence[Sequence]) -> List[List[Fraction]]:
    n = len(dense)
    aug = []
    for i, row in enumerate(dense):
        r = {j: Fraction(v) for j, v in enumerate(row) if v != 0}
        r[n + i] = Fraction(1)
        aug.append(r)
    red, pivots = rref(aug)
    if pivots[:n] != list(range(n)) or len(pivots) != n:
        raise ValueError("matrix is singular")
    return [[row.get(n + j, Fraction(0)) for j in range(n)] for row in red]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> List[List[Fraction]]:
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def sparse_matvec(rows: Sequence[SparseRow], vec: Dict[int, Fraction]) -> Dict[int, Fraction]:
    out = {}
    for i, row in enumerate(rows):
        s = sum((v * vec[j] for j, v in row.items() if j in vec), Fraction(0))
        if s:
            out[i] = s
    return out
