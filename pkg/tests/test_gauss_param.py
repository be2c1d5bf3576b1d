import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nullity_lab import gauss_param as gp
from nullity_lab.complex_linalg import complex_span, invert, subspace_distance
from nullity_lab.errors import (
    NonzeroBaseNullity,
    PositionTangent,
    SingularFiberPoint,
    WrongBaseDimension,
    WrongHolomorphyClass,
)
from nullity_lab.gallery import make_example
from nullity_lab.immersion import (
    Chart,
    FunctionMap,
    Monomial,
    ParametricImmersion,
    analyze_point,
    frame,
    holomorphy_residuals,
)
from nullity_lab.specio import immersion_from_dict

VERTEX_AT_ONE = np.array([4 / 3, 1 / 3, -2 / 3])
L_AT_ONE = np.array([1, -2, 1]) / np.sqrt(6)


def _line(direction, translation, conj=True):
    comps = tuple(((Monomial(d, (1,)),) if d else ()) for d in direction)
    return ParametricImmersion("line", Chart([1.0], 0.5), comps, conj, translation)


@pytest.fixture(scope="module")
def F(cubic):
    return gp.bundle_assembled(cubic)


def test_fiber_at_one(cubic):
    fib = gp.gauss_bundle(cubic, [1.0])
    np.testing.assert_allclose(fib.vertex, VERTEX_AT_ONE, atol=1e-14)
    np.testing.assert_allclose(fib.f_hat_perp, [4 / 7, 1 / 7, -2 / 7], atol=1e-14)
    assert fib.L.complex_dim == 1
    assert abs(abs(np.vdot(fib.L_basis[:, 0], L_AT_ONE)) - 1) < 1e-14


def test_parametrize_unit_fiber_step(cubic):
    p = gp.parametrize(cubic, gp.FiberPoint([1.0], [1.0]))
    d = p - VERTEX_AT_ONE
    assert np.linalg.norm(d) == pytest.approx(1.0, abs=1e-14)
    assert abs(abs(np.vdot(d, L_AT_ONE)) - 1) < 1e-14


def test_fiber_is_normal_to_base_and_position(cubic):
    w = np.array([1.1 + 0.2j])
    fib = gp.gauss_bundle(cubic, w)
    fr = frame(cubic.jet(w, 1))
    assert np.abs(fr.tangent.basis.conj().T @ fib.L_basis).max() < 1e-12
    assert np.abs(fib.f_hat_perp.conj() @ fib.L_basis).max() < 1e-12


def test_vertex_is_inverted_normal_part(cubic):
    for w in cubic.chart.random(10, seed=2):
        fr = frame(cubic.jet(w, 1))
        np.testing.assert_allclose(gp.gauss_bundle(cubic, w).vertex, invert(fr.f_perp), atol=1e-12)


def test_assembled_chart_center_and_c_zero_slice(cubic, F):
    np.testing.assert_allclose(F.value([1.0, 0.0]), VERTEX_AT_ONE, atol=1e-14)
    for w in cubic.chart.random(5, seed=4):
        x = F.chart_point(gp.FiberPoint(w, [0.0]))
        np.testing.assert_allclose(F.value(x), gp.gauss_bundle(cubic, w).vertex, atol=1e-12)


def test_fiber_point_roundtrip(cubic, F):
    xi = gp.FiberPoint([1.05 - 0.1j], [0.4 + 0.7j])
    back = F.fiber_point(F.chart_point(xi))
    np.testing.assert_allclose(back.c, xi.c, atol=1e-12)


def test_assembled_is_holomorphic_with_constant_nullity(F):
    for x in F.chart.random(10, seed=5):
        j, fr, sff, nd = analyze_point(F, x)
        assert holomorphy_residuals(j.jac)[0] < 1e-12
        assert nd.nu == 1
        assert gp.L_subspace_distance(F, x, nd) < 1e-7
        assert gp.normality_residual(F, x) < 1e-9


def test_fiber_frame_is_holomorphic_in_w(F):
    d = F.bundle.first_order(np.array([1.1 + 0.1j]))
    # the exact w-derivative columns along (Re w, Im w) satisfy d/dy = i d/dx
    np.testing.assert_allclose(d.dframe[1], 1j * d.dframe[0], atol=1e-12)
    np.testing.assert_allclose(d.doffset[:, 1], 1j * d.doffset[:, 0], atol=1e-12)


def test_singular_points_match_differential(cubic, F):
    w = np.array([1.0])
    c_star, res = gp.singular_fiber_points(cubic, w)
    assert res < 1e-10
    assert gp.singular_test(cubic, gp.FiberPoint(w, c_star)).status == "singular"
    x = F.chart_point(gp.FiberPoint(w, c_star))
    assert gp.differential_verdict(F, x).status == "singular"
    xr = F.chart_point(gp.FiberPoint(w, c_star + 1.0))
    assert gp.singular_test(cubic, gp.FiberPoint(w, c_star + 1.0)).status == "regular"
    assert gp.differential_verdict(F, xr).status == "regular"
    with pytest.raises(SingularFiberPoint):
        gp.shape_from_base(cubic, gp.FiberPoint(w, c_star))


@settings(max_examples=15, deadline=None)
@given(st.floats(-0.3, 0.3), st.floats(-0.3, 0.3), st.floats(-1, 1), st.floats(-1, 1))
def test_shape_formula_matches_oracle(cubic, F, a, b, cr, ci):
    xi = gp.FiberPoint([1 + a + 1j * b], [cr + 1j * ci])
    if gp.singular_test(cubic, xi).status != "regular":
        return
    assert gp.shape_match(cubic, xi, F) <= 1e-5


def test_shape_formula_with_P_on_both_sides_disagrees(cubic, F):
    xi = gp.FiberPoint([1.0], [0.5])
    assert gp.shape_match(cubic, xi, F, variant="tangential") <= 1e-5
    assert gp.shape_match(cubic, xi, F, variant="P") > 1e-2


def test_recovered_base_and_gauss_map(cubic, F):
    x = F.chart_point(gp.FiberPoint([1.1], [0.3 - 0.2j]))
    rb = gp.recover_base(F, x)
    np.testing.assert_allclose(rb.g, cubic.value([1.1]), atol=1e-10)
    assert rb.anti_holomorphy_residual < 1e-7
    assert rb.nullity_residual < 1e-8
    assert rb.gauss_map_residual < 1e-7


def test_base_normal_line_map_is_neither_class(cubic):
    # the line of fh^perp, seen in an affine chart, is neither holomorphic nor anti-holomorphic
    def h(w):
        p = frame(cubic._jet(w, 1)).f_perp
        return p / p[0]

    hm = FunctionMap("h", cubic.chart, h, 3)
    holo, anti = holomorphy_residuals(hm.fd_jet(np.array([1.1 + 0.1j]), 1).jac)
    assert holo > 0.1 and anti > 0.1


def test_check_base_errors(cylinder):
    with pytest.raises(WrongHolomorphyClass):
        gp.gauss_bundle(make_example("cone_over_curve"), [1.0, 0.0])
    with pytest.raises(PositionTangent):
        gp.gauss_bundle(_line([1, 2, 0], None), [1.0])
    with pytest.raises(NonzeroBaseNullity):
        gp.gauss_bundle(_line([1, 0, 0], [0, 1, 0]), [1.0])
    with pytest.raises(WrongBaseDimension):
        gp.bundle_assembled(make_example("translated_plane"))


def test_cylinder_detection():
    emb = make_example("plane_curve_embedded")
    rep = gp.cylinder_detect(emb, emb.chart.grid(5))
    assert rep.is_cylinder and rep.span_dim == 2
    assert subspace_distance(rep.plane, complex_span([[1, 0, 0], [0, 1, 0]])) < 1e-10
    cubic = make_example("cubic_curve")
    assert not gp.cylinder_detect(cubic, cubic.chart.grid(5)).is_cylinder


def test_roundtrip_direct_cylinder(cylinder):
    rep = gp.verify_roundtrip(cylinder, cylinder.chart.random(10, seed=1))
    assert rep["summary"]["passed"]
    assert rep["summary"]["vertex_nonsingular_all"] and rep["summary"]["L_in_N1perp_all"]


def test_roundtrip_assembled_cubic(F):
    rep = gp.verify_roundtrip(F, F.chart.random(6, seed=2))
    assert rep["summary"]["passed"]
    assert rep["summary"]["max_roundtrip"] <= 1e-8


def test_random_fiber_chart_points_outside_nominal_disc_are_allowed(F):
    # F is affine in c, so only the base coordinate is range-checked
    F.value([1.0, 5.0])
    with pytest.raises(Exception):
        F.value([3.0, 0.0])


def test_spec_defined_base_matches_fixture(cubic):
    spec = {"name": "c", "domain": {"dim": 1, "center": [[1, 0]], "radius": 0.5},
            "components": [[{"coeff": [1, 0], "powers": [k]}] for k in (1, 2, 3)],
            "conjugate_output": True}
    base = immersion_from_dict(json.loads(json.dumps(spec)))
    np.testing.assert_allclose(gp.gauss_bundle(base, [1.0]).vertex, VERTEX_AT_ONE, atol=1e-14)
