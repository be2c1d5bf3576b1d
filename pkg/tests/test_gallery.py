import numpy as np
import pytest

from nullity_lab import gallery
from nullity_lab.errors import UnknownFixture
from nullity_lab.immersion import ANTI_HOLOMORPHIC, HOLOMORPHIC, classify_holomorphy


@pytest.mark.parametrize("name", sorted(gallery.CATALOG))
def test_fixture_expectations(name):
    rep = gallery.check_expected(gallery.fixture(name), per_axis=3)
    assert rep["match"], rep


def test_unknown_fixture():
    with pytest.raises(UnknownFixture):
        gallery.fixture("torus")


def test_plane_curve_parameters():
    imm = gallery.make_example("plane_curve_embedded", {"N": 2, "cls": HOLOMORPHIC})
    assert imm.name == "plane_curve" and imm.ambient_dim == 2
    np.testing.assert_allclose(imm.value([0.1]), [0.1, 1.01])


@pytest.mark.parametrize("seed", range(5))
def test_random_immersion_is_seeded_and_bounded(seed):
    a = gallery.random_immersion(seed, degree=3, m=1, N=3)
    b = gallery.random_immersion(seed, degree=3, m=1, N=3)
    assert a.components == b.components
    assert classify_holomorphy(a, a.chart.grid(3)).kind == ANTI_HOLOMORPHIC
    assert max(np.linalg.norm(a.value(w)) for w in a.chart.grid(5)) <= gallery.IMAGE_RADIUS + 1e-9


def test_random_immersion_argument_checks():
    with pytest.raises(ValueError):
        gallery.random_immersion(0, m=3, N=3)
    with pytest.raises(ValueError):
        gallery.random_immersion(0, cls="neither")


def test_affine_lift_appends_coordinate(cubic):
    lift = gallery.affine_lift(cubic, 2.0)
    np.testing.assert_allclose(lift.value([1.0]), [1, 1, 1, 2])
