import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nullity_lab.complex_linalg import (
    CSubspace,
    J,
    complex_span,
    intersect_complement,
    invert,
    numerical_complex_rank,
    numerical_rank,
    orthogonal_complement,
    phase_normalize,
    project,
    real_inner,
    reflect,
    subspace_distance,
)
from nullity_lab.errors import DimensionMismatch, ZeroVector

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@st.composite
def cvectors(draw, n=None, nonzero=True):
    n = n if n is not None else draw(st.integers(1, 5))
    re = draw(st.lists(finite, min_size=n, max_size=n))
    im = draw(st.lists(finite, min_size=n, max_size=n))
    v = np.array(re) + 1j * np.array(im)
    if nonzero and np.linalg.norm(v) < 1e-3:
        v[0] += 1.0
    return v


@st.composite
def vector_pairs(draw):
    n = draw(st.integers(1, 5))
    return draw(cvectors(n)), draw(cvectors(n)), draw(cvectors(n))


def test_invert_values():
    np.testing.assert_allclose(invert([2.0, 0.0]), [0.5, 0.0])
    np.testing.assert_allclose(invert([1.0, 1j]), [0.5, 0.5j])
    np.testing.assert_allclose(invert([4 / 7, 1 / 7, -2 / 7]), [4 / 3, 1 / 3, -2 / 3])


def test_invert_rejects_zero():
    with pytest.raises(ZeroVector):
        invert([0.0, 0.0])


def test_reflect_values():
    # real hyperplane orthogonal to e1: flips the real part of the first entry only
    np.testing.assert_allclose(reflect([1.0, 0.0], [3.0 + 2j, 4.0]), [-3.0 + 2j, 4.0])
    np.testing.assert_allclose(reflect([1j, 0.0], [3.0 + 2j, 4.0]), [3.0 - 2j, 4.0])


def test_reflect_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        reflect([1.0, 0.0], [1.0, 0.0, 0.0])


def test_real_inner_is_real_part_of_hermitian():
    assert real_inner([1j], [1j]) == 1.0
    assert real_inner([1.0], [1j]) == 0.0


@settings(max_examples=200, deadline=None)
@given(cvectors())
def test_invert_is_involution(z):
    np.testing.assert_allclose(invert(invert(z)), z, rtol=1e-12, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(vector_pairs())
def test_reflect_isometry_involution_and_J(vs):
    z, u, v = vs
    scale = max(1.0, np.linalg.norm(u) * np.linalg.norm(v))
    assert abs(real_inner(reflect(z, u), reflect(z, v)) - real_inner(u, v)) <= 1e-12 * scale
    np.testing.assert_allclose(reflect(z, reflect(z, v)), v, atol=1e-12 * max(1, np.linalg.norm(v)))
    np.testing.assert_allclose(J(reflect(z, v)), reflect(J(z), J(v)), atol=1e-12 * max(1, np.linalg.norm(v)))


def test_complex_span_dependent_vectors():
    S = complex_span([[1, 1j, 0], [1j, -1, 0], [0, 0, 2]])
    assert S.complex_dim == 2
    np.testing.assert_allclose(S.basis.conj().T @ S.basis, np.eye(2), atol=1e-14)


def test_complex_span_is_complex_not_real():
    # v and iv are real-independent but complex-dependent
    assert complex_span([[1, 2], [1j, 2j]]).complex_dim == 1


def test_complex_span_empty_needs_dimension():
    assert complex_span([], ambient_dim=3).complex_dim == 0
    with pytest.raises(DimensionMismatch):
        complex_span([])


def test_project_value():
    t = complex_span([[1, 2, 3]])
    np.testing.assert_allclose(project(t, np.array([1, 1, 1])), [3 / 7, 6 / 7, 9 / 7])


def test_orthogonal_complement_and_intersection():
    t = complex_span([[1, 2, 3]])
    n = orthogonal_complement(t)
    assert n.complex_dim == 2
    assert np.abs(n.basis.conj().T @ t.basis).max() < 1e-14
    line = complex_span([[4, 1, -2]])
    L = intersect_complement(n, line)
    assert subspace_distance(L, complex_span([[1, -2, 1]])) < 1e-12


def test_orthogonal_complement_extremes():
    assert orthogonal_complement(CSubspace.zero(3)).complex_dim == 3
    assert orthogonal_complement(CSubspace.full(3)).complex_dim == 0


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**31 - 1))
def test_complement_is_orthogonal_and_complementary(n, seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, n))
    S = complex_span(rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k)))
    C = orthogonal_complement(S)
    assert S.complex_dim + C.complex_dim == n
    assert np.abs(S.basis.conj().T @ C.basis).max() < 1e-12


def test_numerical_rank_threshold():
    rep = numerical_rank(np.diag([1.0, 1e-3, 1e-12]))
    assert rep.effective_rank == 2
    assert rep.gap_ratio == pytest.approx(1e9)
    assert numerical_complex_rank([[1, 0], [2, 0]]).effective_rank == 1


def test_subspace_distance_identical_and_orthogonal():
    a = complex_span([[1, 0]])
    b = complex_span([[0, 1]])
    assert subspace_distance(a, a) == pytest.approx(0.0, abs=1e-15)
    assert subspace_distance(a, b) == pytest.approx(1.0)


def test_phase_normalize():
    v = phase_normalize([1e-14, 1j, 2])
    assert v[1] == pytest.approx(1.0)
