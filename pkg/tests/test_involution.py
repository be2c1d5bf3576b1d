import numpy as np
import pytest

from nullity_lab.errors import NonzeroNullity, PositionTangent
from nullity_lab.gallery import make_example, random_immersion
from nullity_lab.immersion import ANTI_HOLOMORPHIC, HOLOMORPHIC, Chart, Monomial, ParametricImmersion
from nullity_lab.involution import (
    StarMap,
    conformality_check,
    conformality_spread,
    star,
    star_class,
    verify_star_involution,
)


def _curve(comps, conj=False, translation=None, center=0.0):
    terms = tuple(tuple(Monomial(c, (p,)) for c, p in comp) for comp in comps)
    return ParametricImmersion("curve", Chart([center], 0.5), terms, conj, translation)


@pytest.fixture(scope="module")
def parabola():
    return make_example("plane_curve_embedded", {"N": 2, "cls": HOLOMORPHIC})


def test_star_value_at_origin(parabola):
    # (w, w^2 + 1) at 0: position (0, 1) is already normal, so f* = (0, 1)
    np.testing.assert_allclose(StarMap(parabola).value([0.0]), [0, 1], atol=1e-15)


def test_double_star_is_identity(parabola):
    rep = verify_star_involution(parabola, parabola.chart.grid(5))
    assert rep["summary"]["passed"]
    assert rep["summary"]["max_deviation"] < 1e-12


def test_star_swaps_class(parabola):
    a, b = star_class(parabola, parabola.chart.grid(3))
    assert (a.kind, b.kind) == (HOLOMORPHIC, ANTI_HOLOMORPHIC)
    anti = make_example("plane_curve_embedded", {"N": 2})
    a, b = star_class(anti, anti.chart.grid(3))
    assert (a.kind, b.kind) == (ANTI_HOLOMORPHIC, HOLOMORPHIC)


@pytest.mark.parametrize("seed", range(3))
def test_random_curves_are_conformal(seed):
    imm = random_immersion(seed, degree=3, m=1, N=2, cls=HOLOMORPHIC)
    rep = conformality_check(imm, imm.chart.grid(5))
    assert rep["summary"]["passed"], rep["summary"]


def test_conformality_spread_of_similarity_is_zero():
    jf = np.array([[1.0, 0.0], [0.0, 1.0]])
    rot = np.array([[0.0, -2.0], [2.0, 0.0]])
    assert conformality_spread(jf, rot) == pytest.approx(0.0, abs=1e-15)
    assert conformality_spread(jf, np.diag([1.0, 2.0])) > 0.5


def test_linear_curve_is_degenerate():
    # (w, 1): f_perp is the constant (0, 1), so f* collapses to a point
    rep = verify_star_involution(_curve([[(1, 1)], []], translation=[0, 1]), [np.array([0.1])])
    assert rep["summary"]["degenerate"] == 1 and not rep["summary"]["passed"]


def test_star_rejects_nullity_and_tangency(cylinder):
    with pytest.raises(NonzeroNullity):
        star(cylinder, cylinder.chart.grid(2))
    line = _curve([[(1, 1)], [(2, 1)]], center=1.0)
    with pytest.raises(PositionTangent):
        star(line, [np.array([1.0])])
