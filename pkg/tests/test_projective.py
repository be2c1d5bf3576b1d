import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nullity_lab import projective as pj
from nullity_lab.errors import ChartUndefined, DimensionMismatch, OriginOnImage, ZeroVector
from nullity_lab.gallery import affine_lift, make_example
from nullity_lab.gauss_param import FiberPoint
from nullity_lab.immersion import HOLOMORPHIC, Chart, Monomial, ParametricImmersion, analyze_point


def test_projectivize_normalizes_phase():
    p = pj.projectivize([0, 2j, 2])
    np.testing.assert_allclose(p.homogeneous, [0, 1, -1j] / np.sqrt(2))
    assert p.dimension == 2
    with pytest.raises(ZeroVector):
        pj.projectivize([0, 0])


def test_chordal_distance():
    a, b = pj.projectivize([1, 0]), pj.projectivize([0, 1])
    assert pj.chordal_distance(a, b) == pytest.approx(1.0)
    assert pj.chordal_distance(a, pj.projectivize([3j, 0])) == 0.0
    assert pj.chordal_distance(a, pj.projectivize([1, 1])) == pytest.approx(np.sqrt(0.5))
    with pytest.raises(DimensionMismatch):
        a.distance(pj.projectivize([1, 0, 0]))


def test_chart_lift_is_one_based():
    p = pj.projectivize([2, 4j, 6])
    np.testing.assert_allclose(pj.chart_lift(p, 1), [1, 2j, 3])
    np.testing.assert_allclose(pj.chart_lift(p, 3), [1 / 3, 2j / 3, 1])
    with pytest.raises(ChartUndefined):
        pj.chart_lift(pj.projectivize([0, 1]), 1)
    with pytest.raises(DimensionMismatch):
        pj.chart_lift(p, 0)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=2, max_size=5))
def test_projectivize_chart_lift_roundtrip(parts):
    v = np.array([complex(a, b) for a, b in parts])
    k = int(np.argmax(np.abs(v))) + 1
    if abs(v[k - 1]) < 1e-3:
        return
    lifted = pj.chart_lift(pj.projectivize(v), k)
    np.testing.assert_allclose(lifted, v / v[k - 1], atol=1e-13)


def test_cone_raises_nullity_by_one():
    lift = affine_lift(make_example("plane_curve_embedded", {"N": 2, "cls": HOLOMORPHIC}))
    rep = pj.nullity_shift_check(lift, lift.chart.grid(3))
    assert rep["summary"]["passed"]
    assert rep["summary"]["shifts"] == [(0, 1)]
    assert pj.nullity_shift_check(np.array([1.0, 2.0, 0.5j]), [])["summary"]["shifts"] == [(0, 1)]


def test_cone_over_anti_holomorphic_base_stays_anti(cubic):
    c = pj.cone(cubic)
    np.testing.assert_allclose(c.value([1.2, 1.0]), 1.2 * cubic.value([1.0]))
    np.testing.assert_allclose(c.value([1 + 0.3j, 1.0]), (1 - 0.3j) * cubic.value([1.0]))


def test_cone_over_origin_is_rejected():
    with pytest.raises(OriginOnImage):
        pj.cone(np.zeros(3))
    with pytest.raises(OriginOnImage):
        pj.cone(ParametricImmersion("through0", Chart([0.0], 0.5),
                                    ((Monomial(1, (1,)),), (Monomial(1, (2,)),), ())))


def test_cone_over_curve_fixture_matches_cone_construction():
    fixture = make_example("cone_over_curve")
    lift = affine_lift(make_example("plane_curve_embedded", {"N": 2, "cls": HOLOMORPHIC}))
    built = pj.cone(lift)
    y = np.array([1.1, 0.2j])
    np.testing.assert_allclose(built.value(y), fixture.value(y), atol=1e-14)
    assert analyze_point(built, y)[3].nu == 1


def test_cp_routes_agree():
    lift = make_example("projective_cubic_lift")
    for w in lift.chart.random(5, seed=3):
        rep = pj.cp_chart_route_check(lift, w, np.array([0.3 - 0.4j]))
        assert rep["chordal"] <= 1e-8
        assert rep["chart_roundtrip"] <= 1e-12


def test_cp_parametrize_gives_fiber_point():
    lift = make_example("projective_cubic_lift")
    w = np.array([1.0])
    L = pj.cone_fiber(lift, w)
    assert L.complex_dim == 2
    p = pj.cp_parametrize(lift, FiberPoint(w, [1.0, 0.0]))
    assert pj.chordal_distance(p, pj.projectivize(L.basis[:, 0])) < 1e-14


def test_totally_geodesic():
    # (x, 2x + 1, 1) spans a projective line
    lin = ParametricImmersion("line", Chart([0.0], 0.5), ((Monomial(1, (1,)),), (Monomial(2, (1,)),), ()),
                              translation=[0, 1, 1])
    assert pj.totally_geodesic_test(lin, lin.chart.grid(3)).totally_geodesic
    lift = make_example("projective_cubic_lift")
    assert not pj.totally_geodesic_test(lift, lift.chart.grid(3)).totally_geodesic


def test_sharp_rank_drops_only_for_tangent_position():
    assert pj.sharp_rank(make_example("cubic_curve"), [1.0]) == 2
    assert pj.sharp_rank(make_example("cone_over_curve"), [1.0, 0.0]) == 2
