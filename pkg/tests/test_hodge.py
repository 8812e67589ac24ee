from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from chaingeom import linalg
from chaingeom.extension import build_pair, psi_alpha
from chaingeom.graded_lie import bracket, build_algebra
from chaingeom.hodge import (
    INFINITY,
    CochainError,
    CochainMap,
    basis_cochain,
    codifferential,
    codifferential_split,
    complex_for,
    differential,
    harmonic_kernel,
    harmonic_project,
    laplacian,
    predicates,
    project_pi,
)
from conftest import elementary


def minus_index(alg, i, j):
    """Basis index of E_ij (which must be a basis vector of g_-)."""
    x = elementary(alg, i, j)
    (idx,) = [k for k, c in enumerate(x.coords) if c]
    assert x.coords[idx] == 1
    return idx


def cochain_from(alg, degree, terms):
    """Sum of f^(args) (x) A for (args, element) pairs, args given as g_- indices."""
    coeffs = {}
    for args, a in terms:
        order = sorted(range(len(args)), key=lambda t: args[t])
        sign = 1
        for s in range(len(order)):
            for t in range(s + 1, len(order)):
                if order[s] > order[t]:
                    sign = -sign
        key = tuple(args[t] for t in order)
        for k, v in enumerate(a.coords):
            if v:
                coeffs[key, k] = coeffs.get((key, k), 0) + sign * v
    return CochainMap(alg, degree, coeffs)


def random_cochain(alg, degree, data, terms=6):
    keys = complex_for(alg).keys(degree)
    picks = data.draw(st.lists(st.tuples(st.integers(0, len(keys) - 1), st.integers(-3, 3)), min_size=1, max_size=terms))
    return CochainMap(alg, degree, {keys[i]: Fraction(v) for i, v in picks})


def test_codifferential_of_decomposable_tensor(lag1):
    # Z = E13 is dual to E31 and W = E12 is dual to E21
    z_arg, w_arg = minus_index(lag1, 3, 1), minus_index(lag1, 2, 1)
    Z, W, A = elementary(lag1, 1, 3), elementary(lag1, 1, 2), elementary(lag1, 2, 1)
    c = cochain_from(lag1, 2, [((z_arg, w_arg), A)])
    # A = E21 is itself the basis vector w_arg
    assert list(c.coeffs) == [((0, 1), w_arg)]
    expected = cochain_from(lag1, 1, [((w_arg,), -bracket(Z, A)), ((z_arg,), bracket(W, A))])
    assert bracket(Z, W).is_zero()
    assert codifferential(c) == expected
    # by hand: W (x) E23 + Z (x) (E11 - E22)
    h1 = lag1.from_matrix([[1, 0, 0], [0, -1, 0], [0, 0, 0]])
    assert expected == cochain_from(lag1, 1, [((w_arg,), elementary(lag1, 2, 3)), ((z_arg,), h1)])


def test_codifferential_split_sums(lag2):
    cx = complex_for(lag2)
    for key in cx.keys(2)[::37]:
        c = basis_cochain(lag2, key)
        one, two = codifferential_split(c)
        assert one + two == codifferential(c)


def test_zero_cochain(lag1):
    z2 = CochainMap(lag1, 2, {})
    assert codifferential(z2).is_zero() and laplacian(z2).is_zero() and differential(z2).is_zero()
    assert predicates(z2) == {"regular": True, "normal": True, "torsion_free": True, "min_homogeneity": INFINITY}


def test_unsupported_degrees(lag1):
    with pytest.raises(CochainError):
        codifferential(CochainMap(lag1, 0, {}))
    with pytest.raises(CochainError):
        differential(CochainMap(lag1, 3, {}))
    with pytest.raises(CochainError):
        laplacian(CochainMap(lag1, 1, {}))


@pytest.mark.parametrize("case", [("lagrangean", 1), ("path", 2), ("cr", 1, 0)])
def test_squares_vanish_on_bases(case):
    alg = build_algebra(*case)
    cx = complex_for(alg)
    for key in cx.keys(3):
        assert codifferential(codifferential(basis_cochain(alg, key))).is_zero()
    for key in cx.keys(1):
        assert differential(differential(basis_cochain(alg, key))).is_zero()


@pytest.mark.parametrize("case", [("lagrangean", 1), ("path", 2)])
def test_adjointness_constant(case):
    alg = build_algebra(*case)
    cx = complex_for(alg)
    for lo in (1, 2):
        for k1 in cx.keys(lo):
            dphi = differential(basis_cochain(alg, k1))
            for k2 in cx.keys(lo + 1):
                psi = basis_cochain(alg, k2)
                assert cx.inner(dphi, psi) == -cx.inner(basis_cochain(alg, k1), codifferential(psi))


def test_inner_product_positive(lag1):
    cx = complex_for(lag1)
    for key in cx.keys(2):
        assert cx.inner_key(key, key) > 0


@pytest.mark.parametrize("case", [("lagrangean", 1), ("lagrangean", 2), ("path", 2), ("cr", 1, 0)])
def test_hodge_dimensions(case):
    alg = build_algebra(*case)
    cx = complex_for(alg)
    total = {"dim": 0, "im_d": 0, "im_codiff": 0, "harmonic": 0}
    for w in cx.blocks(2):
        for k, v in cx.block_ranks(w).items():
            total[k] += v
    assert total["im_d"] + total["im_codiff"] + total["harmonic"] == total["dim"] == len(cx.keys(2))
    hb = harmonic_kernel(alg)
    assert hb.total_dim == total["harmonic"]


@pytest.mark.parametrize("case", [("lagrangean", 1), ("lagrangean", 2), ("path", 2)])
def test_harmonic_vectors_are_pure_and_harmonic(case):
    alg = build_algebra(*case)
    hb = harmonic_kernel(alg)
    for comp in hb.components:
        for v in comp.vectors:
            assert laplacian(v).is_zero()
            assert codifferential(v).is_zero() and differential(v).is_zero()
            assert hb.homogeneity_of(v) == comp.homogeneity
            assert hb.container_of(v) == comp.container


def _positive_table(alg):
    return {(r["homogeneity"], r["container_label"], r["dimension"]) for r in harmonic_kernel(alg).table() if r["homogeneity"] > 0}


def test_table_lagrangean_n1(lag1):
    assert _positive_table(lag1) == {(4, "g1L^g2 (x) g1L", 1), (4, "g1R^g2 (x) g1R", 1)}


def test_table_lagrangean_n2(lag2):
    assert _positive_table(lag2) == {(2, "g1L^g1R (x) g0", 5), (1, "g1L^g1L (x) g-1R", 2), (1, "g1R^g1R (x) g-1L", 2)}


def test_table_path_m2():
    assert _positive_table(build_algebra("path", 2)) == {(3, "g1V^g2 (x) g0", 5), (2, "g1E^g2 (x) g-1V", 3), (1, "g1V^g1V (x) g-1E", 1)}


def test_harmonic_torsion_is_not_torsion_free(lag2):
    hb = harmonic_kernel(lag2)
    torsion = [v for c in hb.components if c.homogeneity == 1 for v in c.vectors]
    assert torsion
    for v in torsion:
        p = predicates(v)
        assert not p["torsion_free"] and p["regular"] and p["normal"] and p["min_homogeneity"] == 1


def test_psi_is_harmonic():
    psi = psi_alpha(build_pair("lagrangean", 1))
    assert laplacian(psi).is_zero()
    assert differential(psi).is_zero()


def test_project_pi():
    pair = build_pair("lagrangean", 2)
    psi = psi_alpha(pair)
    pp = project_pi(psi)
    assert pp["piE"].is_zero() and not pp["piV"].is_zero()
    assert pp["piV"] == psi
    zero = project_pi(CochainMap(pair.target, 2, {}))
    assert zero["piE"].is_zero() and zero["piV"].is_zero()


def test_project_pi_rejects_bad_support(lag1):
    tgt = build_algebra("path", 2)
    cx = complex_for(tgt)
    g1 = tgt.grade_indices(-1)
    key = ((g1[0], g1[1]), 0)
    assert key in cx.keys(2)
    with pytest.raises(CochainError):
        project_pi(basis_cochain(tgt, key))
    with pytest.raises(CochainError):
        project_pi(CochainMap(lag1, 2, {}))


def test_harmonic_project_examples():
    pair = build_pair("lagrangean", 1)
    psi = psi_alpha(pair)
    out = harmonic_project(psi)
    assert out["harmonic"] == psi and out["V"] == psi
    assert out["E"].is_zero() and out["rest"].is_zero()
    tgt = pair.target
    cx = complex_for(tgt)
    exact = codifferential(basis_cochain(tgt, cx.keys(3)[5]) + basis_cochain(tgt, cx.keys(3)[40]))
    assert not exact.is_zero()
    assert harmonic_project(exact)["harmonic"].is_zero()
    v = harmonic_kernel(tgt).vectors[0]
    assert harmonic_project(v)["harmonic"] == v
    # a class is unchanged by adding an exact cochain
    assert harmonic_project(v + exact * 3)["harmonic"] == v


def test_harmonic_project_requires_closed(lag1):
    cx = complex_for(lag1)
    c = next(basis_cochain(lag1, k) for k in cx.keys(2) if not codifferential(basis_cochain(lag1, k)).is_zero())
    with pytest.raises(CochainError):
        harmonic_project(c)


def test_coboundary_of_constant_is_closed(lag2):
    cx = complex_for(lag2)
    for a_idx in (0, 5, 9, 14):
        a = lag2.basis_element(a_idx)
        terms = [((x,), bracket(lag2.basis_element(x), a)) for x in cx.minus]
        phi = cochain_from(lag2, 1, terms)
        assert differential(phi).is_zero()


@pytest.mark.parametrize("case", [("lagrangean", 2), ("path", 2), ("cr", 1, 1)])
@given(data=st.data())
@settings(max_examples=15, deadline=None)
def test_random_cochain_identities(case, data):
    alg = build_algebra(*case)
    c1 = random_cochain(alg, 1, data)
    c2 = random_cochain(alg, 2, data)
    c3 = random_cochain(alg, 3, data)
    assert differential(differential(c1)).is_zero()
    assert codifferential(codifferential(c3)).is_zero()
    # image of the codifferential stays in its kernel under the Laplacian
    assert codifferential(laplacian(codifferential(c3))).is_zero()
    # alternating in every pair of arguments
    d = differential(c2)
    for (args, _k) in list(d.coeffs)[:5]:
        x, y, z = args
        assert d.value((x, y, z)) == {k: -v for k, v in d.value((y, x, z)).items()}
        assert d.value((x, y, z)) == d.value((y, z, x))
    # linearity
    assert codifferential(c2 * 2 + c2) == codifferential(c2) * 3


def test_laplacian_block_rank_is_exact(lag1):
    cx = complex_for(lag1)
    rank = 0
    for w, keys in cx.blocks(2).items():
        rank += linalg.rank(cx.block_matrix(cx.laplacian_key, keys, keys))
    assert rank == harmonic_kernel(lag1).laplacian_rank
