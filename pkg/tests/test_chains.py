import csv
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chaingeom.chains import (
    ChainCurve,
    ChainError,
    FlagPoint,
    base_point,
    chain_through,
    chart_coords,
    chart_curve,
    direction_from_coords,
    flag_distance,
    hausdorff_distance,
    manifest,
    sample_chain,
    tangent_direction,
    write_csv,
    write_manifest,
)
from chaingeom.graded_lie import build_algebra
from chaingeom.parabolic_groups import GroupElement, group_exp, random_algebra_element, random_p, random_q, random_rational_element
from conftest import elementary


def exact_frame(alg, rng):
    """Exact group element exp(X_-) exp(X_+) with small rational entries."""
    minus = random_rational_element(alg, rng, ["g-2", "g-1L", "g-1R"], bound=2)
    plus = random_rational_element(alg, rng, ["g1L", "g1R", "g2"], bound=2)
    return group_exp(minus) @ group_exp(plus)


def test_base_chain_closed_form(lag1):
    c = chain_through(base_point(lag1), elementary(lag1, 3, 1))
    assert c.frame.equals(GroupElement.identity(lag1))
    for t in (Fraction(1), Fraction(-2, 3), Fraction(5)):
        pt = c.point(t)
        want = np.array([[Fraction(int(i == j)) for j in range(3)] for i in range(3)], dtype=object)
        want[2, 0] = t
        assert pt.representative.exact is not None
        assert not np.any(pt.representative.exact - want != 0)
    assert base_point(lag1).same_point(c.point(0.0))


def test_base_chain_chart_is_last_axis(lag2):
    (top,) = lag2.indices("g-2")
    c = chain_through(base_point(lag2), lag2.basis_element(top))
    ts = np.linspace(-1, 1, 9)
    want = np.zeros((9, 5))
    want[:, -1] = ts
    assert np.array_equal(chart_curve(c, ts), want)
    assert np.array_equal(chart_coords(base_point(lag2)), np.zeros(5))


def test_frame_correction_example(lag1):
    xi = elementary(lag1, 3, 1) + elementary(lag1, 2, 1)
    c = chain_through(base_point(lag1), xi)
    assert c.frame.exact is not None
    assert not np.any(c.frame.exact - group_exp(elementary(lag1, 2, 3)).exact != 0)
    assert c.direction == elementary(lag1, 3, 1)
    assert tangent_direction(c, base_point(lag1)) == xi


def test_contact_directions_rejected(lag1):
    with pytest.raises(ChainError):
        chain_through(base_point(lag1), elementary(lag1, 2, 1))
    with pytest.raises(ChainError):
        chain_through(base_point(lag1), elementary(lag1, 3, 1) + elementary(lag1, 1, 2))


def test_tangent_requires_start_point(lag1):
    c = chain_through(base_point(lag1), elementary(lag1, 3, 1))
    with pytest.raises(ChainError):
        tangent_direction(c, c.point(1.0))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_frame_normalization_round_trip(n):
    alg = build_algebra("lagrangean", n)
    rng = np.random.default_rng(n)
    for _ in range(4):
        g = exact_frame(alg, rng)
        values = [Fraction(int(rng.integers(1, 4)))] + [Fraction(int(v)) for v in rng.integers(-3, 4, 2 * n)]
        xi = direction_from_coords(alg, values)
        c = chain_through(FlagPoint(g), xi)
        assert tangent_direction(c, FlagPoint(g)) == xi


def test_chart_velocity_is_transverse(lag1):
    c = chain_through(base_point(lag1), elementary(lag1, 3, 1))
    h = 1e-6
    vel = (c.chart(h) - c.chart(-h)) / (2 * h)
    assert np.allclose(vel, [0, 0, 1])


def test_chart_domain(lag1):
    # the flag with line e_2 is outside the big cell
    swap = GroupElement.make(lag1, [[0, 1, 0], [1, 0, 0], [0, 0, 1]])
    with pytest.raises(ChainError):
        chart_coords(FlagPoint(swap))
    with pytest.raises(ChainError):
        chart_coords(base_point(build_algebra("cr", 1, 0)))


def test_sample_chain_starts_at_point(lag2):
    rng = np.random.default_rng(3)
    g = group_exp(random_algebra_element(lag2, rng, scale=0.3))
    xi = direction_from_coords(lag2, [1, 2, -1, 0, 1])
    c = chain_through(FlagPoint(g), xi)
    pts = sample_chain(c, [0.0, 0.5])
    assert pts[0].same_point(FlagPoint(g))
    assert not pts[1].same_point(FlagPoint(g))


@pytest.mark.parametrize("n", [1, 2])
def test_q_invariance(n):
    alg = build_algebra("lagrangean", n)
    rng = np.random.default_rng(10 + n)
    for _ in range(3):
        g = group_exp(random_algebra_element(alg, rng, scale=0.3))
        xi = direction_from_coords(alg, [1] + [int(v) for v in rng.integers(-2, 3, 2 * n)])
        c1 = chain_through(FlagPoint(g), xi)
        c2 = ChainCurve(c1.frame @ random_q(alg, rng, 0.3), c1.direction)
        assert hausdorff_distance(c1, c2) <= 1e-8


def test_representative_independence(lag2):
    rng = np.random.default_rng(21)
    g = group_exp(random_algebra_element(lag2, rng, scale=0.3))
    p = random_p(lag2, rng, 0.3)
    xi = direction_from_coords(lag2, [1, 1, 0, -1, 2])
    c1 = chain_through(FlagPoint(g), xi)
    # the same tangent vector expressed in the frame g p is Ad(p^-1) xi mod p
    moved = tangent_direction(chain_through(FlagPoint(g), xi), FlagPoint(g @ p))
    c2 = chain_through(FlagPoint(g @ p), moved)
    assert FlagPoint(g).same_point(FlagPoint(g @ p))
    assert hausdorff_distance(c1, c2) <= 1e-8


def test_different_chains_are_far(lag1):
    x = base_point(lag1)
    c1 = chain_through(x, direction_from_coords(lag1, [1, 0, 0]))
    c2 = chain_through(x, direction_from_coords(lag1, [1, 1, 0]))
    assert hausdorff_distance(c1, c2) > 1e-2


def test_direction_from_coords_length(lag1):
    with pytest.raises(ChainError):
        direction_from_coords(lag1, [1, 0])


def test_csv_and_manifest(tmp_path, lag1):
    c = chain_through(base_point(lag1), direction_from_coords(lag1, [1, 0, 0]))
    ts = np.linspace(-1, 1, 5)
    path = tmp_path / "c.csv"
    write_csv(str(path), ts, chart_curve(c, ts))
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["t", "x1", "x2", "x3"]
    assert len(rows) == 6
    assert [float(v) for v in rows[1]] == [-1.0, 0.0, 0.0, -1.0]
    data = manifest(c, ts, [1, 0, 0])
    write_manifest(str(tmp_path / "m.json"), data)
    back = json.load(open(tmp_path / "m.json"))
    assert back["n"] == 1 and back["samples"] == 5 and back["t_range"] == [-1.0, 1.0]


@given(seed=st.integers(0, 10_000))
@settings(max_examples=15, deadline=None)
def test_exact_round_trip_property(seed):
    alg = build_algebra("lagrangean", 2)
    rng = np.random.default_rng(seed)
    g = exact_frame(alg, rng)
    xi = random_rational_element(alg, rng, ["g-1L", "g-1R"]) + direction_from_coords(alg, [Fraction(int(rng.integers(1, 5)), 3), 0, 0, 0, 0])
    c = chain_through(FlagPoint(g), xi)
    assert tangent_direction(c, FlagPoint(g)) == xi
    assert c.direction.support_labels() == {"g-2"}


def test_flag_distance(lag1):
    g = group_exp(random_algebra_element(lag1, np.random.default_rng(8), scale=0.5))
    p = random_p(lag1, np.random.default_rng(9))
    assert flag_distance(FlagPoint(g), FlagPoint(g @ p)) < 1e-12
    assert flag_distance(base_point(lag1), FlagPoint(group_exp(elementary(lag1, 3, 1)))) > 0.1
    with pytest.raises(ChainError):
        flag_distance(base_point(build_algebra("cr", 1, 0)), base_point(build_algebra("cr", 1, 0)))


def test_comparison_through_chart_boundary(lag1):
    # the Q-translated arc leaves the big cell inside the window
    c1 = chain_through(base_point(lag1), elementary(lag1, 3, 1))
    q = GroupElement.make(lag1, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 3.0]]) @ group_exp(elementary(lag1, 1, 3))
    c2 = ChainCurve(c1.frame @ q, c1.direction)
    with pytest.raises(ChainError):
        chart_curve(c2, [-1.0])
    assert hausdorff_distance(c1, c2) <= 1e-8
    assert hausdorff_distance(c2, c1) <= 1e-8
