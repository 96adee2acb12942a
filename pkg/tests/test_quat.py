import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcnn import quat

finite = st.floats(-1e3, 1e3, allow_nan=False)
angles = st.floats(-20.0, 20.0, allow_nan=False)
vec3 = st.tuples(finite, finite, finite).map(np.array)
quats = st.tuples(finite, finite, finite, finite).map(np.array)


def test_ij_is_k():
    np.testing.assert_array_equal(quat.hamilton_product([0, 1, 0, 0], [0, 0, 1, 0]), [0, 0, 0, 1])


def test_units_square_to_minus_one_and_ijk():
    i, j, k = np.eye(4)[1:]
    for u in (i, j, k):
        np.testing.assert_array_equal(quat.hamilton_product(u, u), [-1, 0, 0, 0])
    np.testing.assert_array_equal(quat.hamilton_product(quat.hamilton_product(i, j), k), [-1, 0, 0, 0])


def test_pure_square_hand_expanded():
    # (i + 2j + 3k)^2 = -(1 + 4 + 9)
    np.testing.assert_array_equal(quat.hamilton_product([0, 1, 2, 3], [0, 1, 2, 3]), [-14, 0, 0, 0])


def test_product_is_not_commutative():
    p, q = np.array([0, 1, 0, 0]), np.array([0, 0, 1, 0])
    assert not np.allclose(quat.hamilton_product(p, q), quat.hamilton_product(q, p))


@given(quats)
def test_identity_is_neutral(q):
    np.testing.assert_array_equal(quat.hamilton_product([1, 0, 0, 0], q), q)


@given(quats)
def test_conjugate_involution_and_norm(q):
    np.testing.assert_array_equal(quat.conjugate(quat.conjugate(q)), q)
    prod = quat.hamilton_product(q, quat.conjugate(q))
    n2 = float(q @ q)
    np.testing.assert_allclose(prod, [n2, 0, 0, 0], atol=1e-9 * max(n2, 1.0))


def test_conjugate_example():
    np.testing.assert_array_equal(quat.conjugate([1, 2, 3, 4]), [1, -2, -3, -4])


def test_product_broadcasts():
    rng = np.random.default_rng(0)
    p, q = rng.standard_normal((5, 4)), rng.standard_normal((5, 4))
    batch = quat.hamilton_product(p, q)
    for a, b, c in zip(p, q, batch):
        np.testing.assert_allclose(quat.hamilton_product(a, b), c)


def test_quarter_turn_about_k():
    np.testing.assert_allclose(quat.rotate_about_axis([1, 0, 0], [0, 0, 1], math.pi / 2), [0, 1, 0], atol=1e-15)


def test_third_turn_about_gray_cycles_rgb():
    np.testing.assert_allclose(quat.rotate_about_axis([1, 0, 0], quat.GRAY_AXIS, 2 * math.pi / 3), [0, 1, 0], atol=1e-15)


def test_non_unit_axis_rejected():
    with pytest.raises(ValueError, match="unit length"):
        quat.rotate_about_axis([1, 0, 0], [1, 1, 1], 0.3)


@given(vec3, angles)
def test_rotation_stays_pure_and_keeps_norm(v, theta):
    w = quat.rotor(quat.GRAY_AXIS, theta)
    p = quat.hamilton_product(quat.hamilton_product(w, quat.to_pure(v)), quat.conjugate(w))
    norm = np.linalg.norm(v)
    assert abs(p[0]) <= 1e-12 * max(norm, 1.0)
    np.testing.assert_allclose(np.linalg.norm(p[1:]), norm, rtol=1e-10, atol=1e-12)


@given(vec3)
def test_zero_angle_is_identity(v):
    np.testing.assert_allclose(quat.rotate_about_axis(v, quat.GRAY_AXIS, 0.0), v, atol=1e-12)


@pytest.mark.parametrize(
    "theta, expected",
    [(0.0, (1, 0, 0)), (2 * math.pi / 3, (0, 0, 1)), (-2 * math.pi / 3, (0, 1, 0)), (math.pi, (-1 / 3, 2 / 3, 2 / 3))],
)
def test_coeff_values(theta, expected):
    np.testing.assert_allclose(quat.rotation_coeffs(theta), expected, atol=1e-15)


def test_coeffs_match_rotation_oracle():
    # columns of M(theta) are the images of the basis vectors under the literal rotation
    for theta in np.linspace(-7, 7, 29):
        m = quat.rotation_matrix(theta)
        for q in range(3):
            np.testing.assert_allclose(m[:, q], quat.rotate_about_axis(np.eye(3)[q], quat.GRAY_AXIS, theta), atol=1e-14)


def test_coeff_sums_over_grid():
    f = np.array(quat.rotation_coeffs(np.linspace(-10, 10, 2001)))
    np.testing.assert_allclose(f.sum(axis=0), 1.0, atol=1e-12)
    np.testing.assert_allclose((f * f).sum(axis=0), 1.0, atol=1e-12)


@pytest.mark.parametrize("theta", [-math.pi, -math.pi / 2, 0.0, 0.3, math.pi / 2, math.pi])
def test_deriv_matches_central_differences(theta):
    h = 1e-6
    numeric = (np.array(quat.rotation_coeffs(theta + h)) - np.array(quat.rotation_coeffs(theta - h))) / (2 * h)
    np.testing.assert_allclose(quat.rotation_coeffs_deriv(theta), numeric, atol=1e-8)


def test_deriv_at_zero():
    s3 = math.sqrt(3) / 3
    np.testing.assert_allclose(quat.rotation_coeffs_deriv(0.0), (0.0, -s3, s3), atol=1e-15)


@given(angles)
def test_deriv_sums_to_zero_and_first_order_taylor(theta):
    d = np.array(quat.rotation_coeffs_deriv(theta))
    assert abs(d.sum()) < 1e-12
    h = 1e-6
    lin = np.array(quat.rotation_coeffs(theta)) + h * d
    np.testing.assert_allclose(quat.rotation_coeffs(theta + h), lin, atol=1e-11)


def test_circulant_layout():
    m = quat.circulant((1.0, 2.0, 3.0))
    np.testing.assert_array_equal(m, [[1, 2, 3], [3, 1, 2], [2, 3, 1]])


@pytest.mark.parametrize(
    "s, theta, v, expected",
    [
        (1.0, 0.0, (0.3, -0.2, 0.9), (0.3, -0.2, 0.9)),
        (2.0, 1.234, (0.4, 0.4, 0.4), (0.8, 0.8, 0.8)),
        (1.0, 2 * math.pi / 3, (1.0, 0.0, 0.0), (0.0, 1.0, 0.0)),
    ],
)
def test_apply_color_rotation_examples(s, theta, v, expected):
    np.testing.assert_allclose(quat.apply_color_rotation(s, theta, np.array(v)), expected, atol=1e-15)


def test_matrix_path_equals_hamilton_oracle_sweep():
    rng = np.random.default_rng(7)
    s = rng.normal(0, 2, 1000)
    theta = rng.uniform(-10, 10, 1000)
    v = rng.normal(0, 1, (1000, 3))
    fast = quat.apply_color_rotation(s, theta, v)
    oracle = s[:, None] * quat.rotate_about_axis(v, quat.GRAY_AXIS, theta)
    err = np.abs(fast - oracle).max(axis=1) / np.maximum(np.abs(oracle).max(axis=1), 1e-300)
    assert err.max() < 1e-10


@given(st.floats(-5, 5, allow_nan=False), angles, vec3)
def test_gray_projection_independent_of_theta(s, theta, v):
    out = quat.apply_color_rotation(s, theta, v)
    assert math.isclose(out.sum(), s * v.sum(), rel_tol=1e-9, abs_tol=1e-9 * (1 + abs(s) * np.abs(v).sum()))


def test_negative_and_zero_scale():
    v = np.array([0.1, 0.5, 0.9])
    np.testing.assert_array_equal(quat.apply_color_rotation(0.0, 0.7, v), 0.0)
    np.testing.assert_allclose(quat.apply_color_rotation(-1.0, 0.7, v), -quat.apply_color_rotation(1.0, 0.7, v))


def test_unwrapped_angles_are_periodic():
    np.testing.assert_allclose(quat.rotation_matrix(0.4 + 6 * math.pi), quat.rotation_matrix(0.4), atol=1e-13)
