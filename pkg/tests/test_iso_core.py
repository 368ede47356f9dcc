import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isozmc import iso_core as ic
from isozmc.catalog import ClosedFormSurface, SurfaceTag, closed_form_surface

reals = st.floats(-10, 10, allow_nan=False)
vec4 = st.lists(reals, min_size=4, max_size=4).map(np.array)


def test_form_examples():
    assert ic.minkowski_form(ic.P, ic.P_TILDE) == 1.0
    assert ic.minkowski_form(ic.P, ic.P) == 0.0
    assert ic.minkowski_form(ic.E1, ic.E1) == 1.0
    assert ic.is_lightlike(ic.P) and ic.is_lightlike(ic.P_TILDE)


def test_iso_inner_examples():
    assert ic.iso_inner([1, 1, 0], [1, 1, 0]) == 1
    assert ic.iso_inner([5, 0, 0], [5, 0, 0]) == 0
    assert ic.iso_inner([0, 3, 4], [0, 3, 4]) == 25


@given(st.lists(reals, min_size=3, max_size=3), st.lists(reals, min_size=3, max_size=3))
def test_iso_inner_agrees_with_form_on_embedded(a, b):
    assert ic.iso_inner(a, b) == pytest.approx(ic.minkowski_form(ic.embed(a), ic.embed(b)), abs=1e-12)


def test_embedding_is_orthogonal_to_p():
    X = np.array([[1.5, -2.0, 3.0], [0.0, 0.0, 0.0]])
    assert np.all(ic.minkowski_form(ic.embed(X), ic.P) == 0.0)
    np.testing.assert_array_equal(ic.project(ic.embed(X)), X)
    with pytest.raises(ValueError, match="not in isotropic space"):
        ic.project(np.array([1.0, 0.0, 0.0, 0.0]))


def test_rotation_examples():
    # at zero parameter the printed matrices reduce to reflections, not the identity
    np.testing.assert_array_equal(ic.parabolic_rotation_e1(0.0).matrix, np.diag([1.0, 1.0, -1.0, 1.0]))
    np.testing.assert_array_equal(ic.parabolic_rotation_e2(0.0).matrix, np.diag([1.0, -1.0, 1.0, 1.0]))
    for v in (-1.0, 0.5, 2.0):
        np.testing.assert_allclose(ic.parabolic_rotation_e1(v).matrix @ ic.P, ic.P, atol=0)
    for u in (-1.0, 0.5, 2.0):
        np.testing.assert_allclose(ic.parabolic_rotation_e2(u).matrix @ ic.E2, ic.E2, atol=0)


@settings(max_examples=200)
@given(st.floats(-5, 5), vec4, vec4)
def test_rotations_preserve_form(t, X, Y):
    for A in (ic.parabolic_rotation_e1(t), ic.parabolic_rotation_e2(t)):
        lhs = ic.minkowski_form(A.matrix @ X, A.matrix @ Y)
        scale = max(1.0, (1 + t * t) ** 2)
        assert abs(lhs - ic.minkowski_form(X, Y)) <= 1e-12 * scale * 100
        assert A.is_isometry()
        assert A.fixes_p()


def test_printed_matrices_have_negative_determinant():
    # taken verbatim: they preserve the form but reverse orientation
    assert np.linalg.det(ic.parabolic_rotation_e1(0.7).matrix) == pytest.approx(-1.0)
    assert np.linalg.det(ic.parabolic_rotation_e2(0.7).matrix) == pytest.approx(-1.0)


@pytest.mark.parametrize("r", [-1.0, 0.5, 2.0])
@pytest.mark.parametrize("v", [-1.5, 0.3, 1.0])
def test_orbit_of_origin(r, v):
    X = ic.parabolic_action(ic.parabolic_rotation_e1(v), r, ic.ORIGIN)
    np.testing.assert_allclose(X, [-r * v * v / 2, 0.0, r * v], atol=1e-12)
    # parabola l = -y^2 / (2r) inside the plane x = 0
    assert X[1] == 0.0
    assert abs(X[0] + X[2] ** 2 / (2 * r)) <= 1e-12


@given(st.floats(-3, 3), st.floats(-3, 3), st.lists(reals, min_size=3, max_size=3))
def test_action_stays_in_isotropic_space(t, r, X):
    Y = ic.parabolic_action(ic.parabolic_rotation_e2(t), r, X)
    assert abs(ic.minkowski_form(ic.embed(Y), ic.P)) <= 1e-12


def test_zero_radius_fixes_origin():
    np.testing.assert_array_equal(ic.parabolic_action(ic.parabolic_rotation_e2(1.3), 0.0, ic.ORIGIN), ic.ORIGIN)


def test_two_rotations_give_trivial_enneper():
    for u, v in [(0.0, 0.0), (1.0, 1.0), (-0.4, 2.2)]:
        np.testing.assert_allclose(ic.enneper_by_rotations(u, v), -np.array([(u * u - v * v) / 2, u, v]), atol=1e-12)
    np.testing.assert_allclose(
        ic.enneper_by_rotations(1.0, 1.0),
        closed_form_surface(ClosedFormSurface(SurfaceTag.TRIVIAL_ENNEPER_X0), 1.0, 1.0),
        atol=1e-15,
    )


def test_action_rejects_isometry_not_fixing_p():
    boost = np.eye(4)
    boost[[0, 0, 3, 3], [0, 3, 0, 3]] = [np.cosh(1), np.sinh(1), np.sinh(1), np.cosh(1)]
    A = ic.Isometry4(boost, name="boost")
    assert A.is_isometry()
    with pytest.raises(ValueError, match="does not fix p"):
        ic.parabolic_action(A, 1.0, ic.ORIGIN)


def test_isometry_check_flags_non_isometry():
    assert not ic.Isometry4(2 * np.eye(4)).is_isometry()


def test_plane_carrier_membership():
    m = ic.P_TILDE + ic.E1 - 0.5 * ic.P  # lightlike with <m, p> = 1
    assert ic.minkowski_form(m, m) == pytest.approx(0.0, abs=1e-15)
    C = ic.PlaneCarrier.normalized(3 * m, 6.0)
    assert ic.minkowski_form(C.m, ic.P) == pytest.approx(1.0)
    # <(l, x, y, l), m> = -l * m0 + x * m1 + y * m2 + l * m3 = x + l
    assert C.contains(np.array([1.0, 1.0, 7.0]))
    assert not C.contains(np.array([0.0, 0.0, 0.0]))
    with pytest.raises(ValueError):
        ic.PlaneCarrier.normalized(ic.P)
