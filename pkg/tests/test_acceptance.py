"""Acceptance gate.  Run with pytest, or directly as a script for one line per criterion."""
import sys
import time
from fractions import Fraction

import numpy as np

from chaingeom.chains import ChainCurve, FlagPoint, base_point, chain_through, direction_from_coords, hausdorff_distance, tangent_direction
from chaingeom.extension import (
    build_pair,
    check_conditions,
    extend_curvature,
    psi_alpha,
    psi_symmetrization_constant,
    psi_value,
    torsion_free_normal_basis,
    transfer_tensor,
)
from chaingeom.graded_lie import build_algebra, grading_defect, isotropic_splitting, jacobi_defect, levi_nondegenerate
from chaingeom.hodge import CochainMap, codifferential, complex_for, harmonic_kernel, is_normal, is_regular, predicates, project_pi
from chaingeom.parabolic_groups import group_exp, random_algebra_element, random_q, random_rational_element
from chaingeom.reconstruct import round_trip

CR_PAIRS = [(p, q) for p in range(4) for q in range(4) if 1 <= p + q <= 3]
PAIRS = [("lagrangean", n) for n in (1, 2, 3)] + [("cr", p, q) for p, q in CR_PAIRS]
PSI_CONTAINER = {"g1V^g2 (x) g0"}

# positive homogeneity part of the harmonic curvature, (homogeneity, container, dimension)
TABLES = {
    ("lagrangean", 1): {(4, "g1L^g2 (x) g1L", 1), (4, "g1R^g2 (x) g1R", 1)},
    ("lagrangean", 2): {(2, "g1L^g1R (x) g0", 5), (1, "g1L^g1L (x) g-1R", 2), (1, "g1R^g1R (x) g-1L", 2)},
    ("lagrangean", 3): {(2, "g1L^g1R (x) g0", 27), (1, "g1L^g1L (x) g-1R", 8), (1, "g1R^g1R (x) g-1L", 8)},
    ("path", 2): {(3, "g1V^g2 (x) g0", 5), (2, "g1E^g2 (x) g-1V", 3), (1, "g1V^g1V (x) g-1E", 1)},
    ("path", 4): {(3, "g1V^g2 (x) g0", 70), (2, "g1E^g2 (x) g-1V", 15)},
    ("path", 5): {(3, "g1V^g2 (x) g0", 160), (2, "g1E^g2 (x) g-1V", 24)},
    ("path", 6): {(3, "g1V^g2 (x) g0", 315), (2, "g1E^g2 (x) g-1V", 35)},
}


def _zeros(size):
    return np.full((size, size), Fraction(0), dtype=object)


def _minus(pair, x):
    return [x[i] for i in pair.target_minus]


def _block_display_holds(pair, rng) -> bool:
    """Psi(X, [Y, W0]) for X, Y in g_-2 of the source against the explicit lower-right block."""
    n, tgt = pair.n, pair.target
    w0 = tgt.coords({(0, 1): Fraction(1)})

    def g2(v):
        m = _zeros(2 * n + 2)
        for i, c in enumerate(v):
            m[2 + i, 0] = c
        return tgt.from_matrix(m)

    col = lambda v: np.array(v, dtype=object).reshape(-1, 1)
    for _ in range(3):
        X = [Fraction(int(v)) for v in rng.integers(-3, 4, 2 * n)]
        Y = [Fraction(int(v)) for v in rng.integers(-3, 4, 2 * n)]
        yw = tgt.bracket_coords(g2(Y).coords, w0)
        got = tgt.dense(psi_value(pair, _minus(pair, g2(X).coords), _minus(pair, yw)))
        X1, X2, Y1, Y2 = col(X[:n]), col(X[n:]), col(Y[:n]), col(Y[n:])
        s = (Y2.T.dot(X1) + X2.T.dot(Y1))[0, 0]
        ident = np.eye(n, dtype=int).astype(object)
        block = np.block([
            [X1.dot(Y2.T) + Y1.dot(X2.T) + s * ident, X1.dot(Y1.T) + Y1.dot(X1.T)],
            [-X2.dot(Y2.T) - Y2.dot(X2.T), -Y2.dot(X1.T) - X2.dot(Y1.T) - s * ident],
        ]) / 2
        want = _zeros(2 * n + 2)
        want[2:, 2:] = block
        if np.any(got - want != 0):
            return False
    return True


def test_criterion_01_structure():
    start = time.time()
    algebras = [("lagrangean", n) for n in range(1, 5)] + [("path", m) for m in range(2, 9)] + [("cr", p, q) for p, q in CR_PAIRS]
    for case in algebras:
        alg = build_algebra(*case)
        assert jacobi_defect(alg) == 0, case
        assert grading_defect(alg) == 0, case
        assert levi_nondegenerate(alg), case
        if alg.family != "cr":
            assert isotropic_splitting(alg), case
    assert time.time() - start <= 30


def test_criterion_02_extension_conditions():
    rng = np.random.default_rng(2)
    for case in PAIRS:
        pair = build_pair(*case)
        rep = check_conditions(pair, [random_q(pair.source, rng) for _ in range(100)])
        assert rep.condition1_infinitesimal, case
        assert rep.condition1_residual <= 1e-9, (case, rep.condition1_residual)
        assert rep.condition2_exact, case
        assert rep.condition3_rank == rep.condition3_expected, case


def test_criterion_03_psi_support_and_constant():
    rng = np.random.default_rng(3)
    constants = {}
    for case in PAIRS:
        pair = build_pair(*case)
        psi = psi_alpha(pair)
        assert psi.containers() == PSI_CONTAINER, case
        const = psi_symmetrization_constant(pair)
        assert isinstance(const, Fraction) and const != 0, case
        constants[case] = const
        if case[0] == "lagrangean":
            assert _block_display_holds(pair, rng), case
    print(f"symmetrization constants: {sorted({str(c) for c in constants.values()})}")
    assert set(constants.values()) == {Fraction(3)}


def test_criterion_04_psi_normal_regular_nonflat():
    for case in PAIRS:
        psi = psi_alpha(build_pair(*case))
        assert codifferential(psi).is_zero(), case
        p = predicates(psi)
        assert p["regular"] and p["normal"] and p["torsion_free"], case
        assert not psi.is_zero(), case


def test_criterion_05_harmonic_tables():
    start = time.time()
    for case, want in TABLES.items():
        hb = harmonic_kernel(build_algebra(*case))
        got = {(r["homogeneity"], r["container_label"], r["dimension"]) for r in hb.table() if r["homogeneity"] > 0}
        assert got == want, case
    assert time.time() - start <= 300


def test_criterion_06_sufficiency():
    sizes = {}
    for n in (1, 2, 3):
        pair = build_pair("lagrangean", n)
        basis = torsion_free_normal_basis(pair)
        assert basis
        for k in basis:
            out = extend_curvature(pair, k)
            assert is_normal(out) and is_regular(out), n
        sizes[n] = len(basis)
    assert sizes == {1: 5, 2: 53, 3: 252}


def test_criterion_07_necessity():
    for n in (2, 3):
        pair = build_pair("lagrangean", n)
        hb = harmonic_kernel(pair.source)
        torsion = [v for c in hb.components if c.homogeneity == 1 for v in c.vectors]
        assert len(torsion) == sum(d for h, _, d in TABLES["lagrangean", n] if h == 1)
        for tau in torsion:
            out = extend_curvature(pair, tau)
            assert not (is_regular(out) and is_normal(out)), n


def test_criterion_08_chains():
    # base chain in a pure g_-2 direction is id + tE, exactly
    alg1 = build_algebra("lagrangean", 1)
    (top,) = alg1.indices("g-2")
    c = chain_through(base_point(alg1), alg1.basis_element(top))
    for t in (Fraction(1), Fraction(-1, 2), Fraction(7, 3)):
        want = np.array([[Fraction(int(i == j)) for j in range(3)] for i in range(3)], dtype=object)
        want[2, 0] = t
        rep = c.point(t).representative
        assert rep.exact is not None and not np.any(rep.exact - want != 0)
    rng = np.random.default_rng(8)
    worst = 0.0
    for n in (1, 2, 3):
        alg = build_algebra("lagrangean", n)
        for _ in range(4):
            # exact frame normalization round trip
            g = group_exp(random_rational_element(alg, rng, ["g-2", "g-1L", "g-1R"], bound=2)) @ group_exp(
                random_rational_element(alg, rng, ["g1L", "g1R", "g2"], bound=2))
            values = [Fraction(int(rng.integers(1, 4)))] + [Fraction(int(v)) for v in rng.integers(-3, 4, 2 * n)]
            xi = direction_from_coords(alg, values)
            assert tangent_direction(chain_through(FlagPoint(g), xi), FlagPoint(g)) == xi
            # Q-invariance as unparametrized curves
            h = group_exp(random_algebra_element(alg, rng, scale=0.3))
            xi = direction_from_coords(alg, [1] + [int(v) for v in rng.integers(-2, 3, 2 * n)])
            c1 = chain_through(FlagPoint(h), xi)
            c2 = ChainCurve(c1.frame @ random_q(alg, rng, 0.3), c1.direction)
            worst = max(worst, hausdorff_distance(c1, c2, (-1.0, 1.0)))
    print(f"worst chain Hausdorff distance: {worst:.3e}")
    assert worst <= 1e-8


def test_criterion_09_reconstruction():
    start = time.time()
    worst = 0.0
    for kind in ("product", "complex"):
        for n in (1, 2, 3):
            for k in range(20):
                worst = max(worst, round_trip(kind, n, 1000 * n + k)["error"])
    elapsed = time.time() - start
    print(f"worst reconstruction error: {worst:.3e} in {elapsed:.1f}s")
    assert worst <= 1e-8
    assert elapsed <= 60


def test_criterion_10_pi_projections():
    rng = np.random.default_rng(10)
    for case in [("lagrangean", 1), ("lagrangean", 2), ("lagrangean", 3), ("cr", 1, 0), ("cr", 1, 1)]:
        pair = build_pair(*case)
        pp = project_pi(psi_alpha(pair))
        assert pp["piE"].is_zero(), case
        assert not pp["piV"].is_zero(), case
        keys = complex_for(pair.source).keys(2)
        for _ in range(50):
            idx = rng.choice(len(keys), size=min(12, len(keys)), replace=False)
            kappa = CochainMap(pair.source, 2, {keys[i]: Fraction(int(rng.integers(-5, 6))) for i in idx})
            assert project_pi(transfer_tensor(pair, kappa))["piV"].is_zero(), case


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted((k, v) for k, v in globals().items() if k.startswith("test_criterion_")):
        start = time.time()
        try:
            fn()
            status = "PASS"
        except Exception as exc:
            status = f"FAIL ({type(exc).__name__}: {exc})"
            failed += 1
        print(f"{name}: {status} [{time.time() - start:.1f}s]")
    sys.exit(1 if failed else 0)
