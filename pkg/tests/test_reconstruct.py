import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import subspace_angles

from chaingeom.reconstruct import (
    ContactFiber,
    CubicTensor,
    FiberError,
    ReconstructionError,
    build_s,
    default_probes,
    eigenspaces,
    membership,
    random_fiber,
    reconstruct_cr,
    reconstruct_lagrangean,
    round_trip,
    sign_error,
    standard_fiber,
    transform_fiber,
)


def loop_symmetrization(levi, k):
    """Independent oracle: S[i,j,l,m] by explicit loops over permutations."""
    d = len(levi)

    def b(x, y):
        return sum(levi[x][a] * k[a][y] for a in range(d))

    out = {}
    for i, j, l in itertools.product(range(d), repeat=3):
        for m in range(d):
            out[i, j, l, m] = sum(b(p[0], p[1]) * k[m][p[2]] for p in itertools.permutations((i, j, l))) / 6
    return out


def test_standard_n1_coefficients():
    s = build_s(standard_fiber("product", 1))
    assert s.is_symmetric()
    assert s.coeffs[0, 0, 1, 0] == Fraction(-2, 3)
    assert s.coeffs[0, 1, 1, 1] == Fraction(2, 3)
    f = standard_fiber("product", 1)
    oracle = loop_symmetrization(f.levi.tolist(), f.structure.tolist())
    for key, v in oracle.items():
        assert s.coeffs[key] == v


@pytest.mark.parametrize("kind,n", [("product", 2), ("complex", 2)])
def test_build_s_matches_loop_oracle(kind, n):
    f = standard_fiber(kind, n)
    s = build_s(f)
    oracle = loop_symmetrization(f.levi.tolist(), f.structure.tolist())
    assert all(s.coeffs[key] == v for key, v in oracle.items())


def test_s_vanishes_cubically_on_eigenvectors():
    rng = np.random.default_rng(0)
    f, _ = random_fiber("product", 2, rng)
    s = build_s(f)
    for basis in eigenspaces(f):
        for x in basis.T:
            assert np.linalg.norm(s(x, x, x)) < 1e-12 * s.norm()
            assert membership(s, x, default_probes(4))


def test_s_invariant_under_swap():
    rng = np.random.default_rng(1)
    f, _ = random_fiber("product", 2, rng)
    flipped = ContactFiber(f.levi, -f.structure, "product")
    assert np.allclose(build_s(f).coeffs, build_s(flipped).coeffs, atol=1e-12)


def test_membership_negative_and_errors():
    f = standard_fiber("product", 2)
    s = build_s(f)
    levi = np.asarray(f.levi, dtype=float)
    k = np.asarray(f.structure, dtype=float)
    xi = np.array([1.0, 0.3, 0.7, -0.2])
    assert abs(xi @ levi @ k @ xi) > 0
    assert not membership(s, xi, default_probes(4))
    with pytest.raises(ValueError):
        membership(s, np.zeros(4), default_probes(4))
    with pytest.raises(ValueError):
        membership(s, xi, [])


@given(scale=st.floats(1e-3, 1e3), sscale=st.floats(1e-3, 1e3))
@settings(max_examples=25, deadline=None)
def test_membership_scale_invariant(scale, sscale):
    f = standard_fiber("product", 2)
    s = build_s(f)
    scaled = CubicTensor(s.to_float() * sscale)
    probes = default_probes(4)
    good = np.array([1.0, 2.0, 0.0, 0.0])
    bad = np.array([1.0, 0.0, 1.0, 0.0])
    assert membership(scaled, scale * good, probes)
    assert not membership(scaled, scale * bad, probes)


def test_fiber_validation():
    f = standard_fiber("product", 1)
    with pytest.raises(FiberError):
        build_s(ContactFiber(np.zeros((2, 2)), f.structure, "product"))
    with pytest.raises(FiberError):
        build_s(ContactFiber(np.array([[0.0, 1.0], [1.0, 0.0]]), f.structure, "product"))
    with pytest.raises(FiberError):
        build_s(ContactFiber(f.levi, np.eye(2), "product"))
    with pytest.raises(FiberError):
        build_s(ContactFiber(f.levi, f.structure, "complex"))
    with pytest.raises(FiberError):
        standard_fiber("quaternionic", 1)
    with pytest.raises(FiberError):
        standard_fiber("complex", 2, (2, 1))


def test_standard_n1_reconstruction_is_axes():
    a, b = reconstruct_lagrangean(build_s(standard_fiber("product", 1)))
    axes = {tuple(np.round(np.abs(v.ravel()), 12)) for v in (a, b)}
    assert axes == {(1.0, 0.0), (0.0, 1.0)}


def test_reconstruction_is_equivariant():
    rng = np.random.default_rng(2)
    base = standard_fiber("product", 2)
    t = np.eye(4) + 0.4 * rng.normal(size=(4, 4))
    found = reconstruct_lagrangean(build_s(transform_fiber(base, t)))
    moved = [t @ np.vstack([np.eye(2), np.zeros((2, 2))]), t @ np.vstack([np.zeros((2, 2)), np.eye(2)])]
    errs = [max(np.max(subspace_angles(found[0], moved[i])), np.max(subspace_angles(found[1], moved[1 - i]))) for i in (0, 1)]
    assert min(errs) < 1e-8


def test_standard_cr_reconstruction():
    f = standard_fiber("complex", 1)
    j = reconstruct_cr(build_s(f))
    assert sign_error(j, f.structure) < 1e-10
    assert np.allclose(j @ j, -np.eye(2))


def test_degenerate_and_wrong_type():
    zero = CubicTensor(np.zeros((4, 4, 4, 4)))
    with pytest.raises(ReconstructionError):
        reconstruct_lagrangean(zero)
    with pytest.raises(ReconstructionError):
        reconstruct_cr(zero)
    rng = np.random.default_rng(3)
    product, _ = random_fiber("product", 2, rng)
    with pytest.raises(ReconstructionError) as err:
        reconstruct_cr(build_s(product))
    assert "real" in str(err.value)
    complex_, _ = random_fiber("complex", 2, rng)
    with pytest.raises(ReconstructionError):
        reconstruct_lagrangean(build_s(complex_))


@pytest.mark.parametrize("kind", ["product", "complex"])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_round_trips(kind, n):
    for seed in range(3):
        rep = round_trip(kind, n, 100 + seed)
        assert rep["error"] <= 1e-8, rep
        if kind == "complex":
            assert rep["residuals"]["rebuild"] <= 1e-9


def test_round_trip_is_deterministic():
    assert round_trip("product", 2, 7) == round_trip("product", 2, 7)
