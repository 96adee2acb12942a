"""Quaternion algebra and rotations about the gray axis of RGB space.

Quaternions are stored as arrays whose last axis holds ``(w, x, y, z)``.
Colour vectors are arrays whose last axis holds ``(r, g, b)`` and map onto
pure quaternions as ``r -> x``, ``g -> y``, ``b -> z``.  Every function here
broadcasts over leading axes.
"""

from typing import NamedTuple

import numpy as np

GRAY_AXIS = np.full(3, 1.0 / np.sqrt(3.0))

_THIRD_PI = np.pi / 3.0


class RotationCoeffs(NamedTuple):
    """Entries of the circulant matrix with rows (f1, f2, f3), (f3, f1, f2), (f2, f3, f1)."""

    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray


def quaternion(w=0.0, x=0.0, y=0.0, z=0.0):
    return np.array([w, x, y, z], dtype=float)


def hamilton_product(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    p0, p1, p2, p3 = np.moveaxis(p, -1, 0)
    q0, q1, q2, q3 = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            p0 * q0 - p1 * q1 - p2 * q2 - p3 * q3,
            p0 * q1 + p1 * q0 + p2 * q3 - p3 * q2,
            p0 * q2 - p1 * q3 + p2 * q0 + p3 * q1,
            p0 * q3 + p1 * q2 - p2 * q1 + p3 * q0,
        ],
        axis=-1,
    )


def conjugate(q):
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def to_pure(v):
    """Lift colour vectors ``(..., 3)`` to pure quaternions ``(..., 4)``."""
    v = np.asarray(v, dtype=float)
    return np.concatenate([np.zeros(v.shape[:-1] + (1,)), v], axis=-1)


def from_pure(q):
    return np.asarray(q)[..., 1:]


def rotor(axis, theta):
    """Unit quaternion cos(theta/2) + sin(theta/2) * axis."""
    axis = np.asarray(axis, dtype=float)
    theta = np.asarray(theta, dtype=float)[..., None]
    half = theta / 2.0
    return np.concatenate([np.cos(half), np.sin(half) * axis], axis=-1)


def rotate_about_axis(v, axis, theta):
    """Rotate colour vector(s) ``v`` by ``theta`` about a unit ``axis``.

    Evaluated literally as ``w q w*`` with two Hamilton products; this is the
    reference path the matrix form is checked against.
    """
    axis = np.asarray(axis, dtype=float)
    if abs(np.linalg.norm(axis) - 1.0) > 1e-9:
        raise ValueError(f"rotation axis must have unit length, got norm {np.linalg.norm(axis)!r}")
    w = rotor(axis, theta)
    p = hamilton_product(hamilton_product(w, to_pure(v)), conjugate(w))
    return from_pure(p)


def rotation_coeffs(theta):
    theta = np.asarray(theta)
    return RotationCoeffs(
        1.0 / 3.0 + 2.0 / 3.0 * np.cos(theta),
        1.0 / 3.0 - 2.0 / 3.0 * np.cos(theta - _THIRD_PI),
        1.0 / 3.0 - 2.0 / 3.0 * np.cos(theta + _THIRD_PI),
    )


def rotation_coeffs_deriv(theta):
    theta = np.asarray(theta)
    return RotationCoeffs(
        -2.0 / 3.0 * np.sin(theta),
        2.0 / 3.0 * np.sin(theta - _THIRD_PI),
        2.0 / 3.0 * np.sin(theta + _THIRD_PI),
    )


def circulant(coeffs):
    """Stack coefficients into ``(..., 3, 3)`` circulant matrices."""
    f1, f2, f3 = (np.asarray(f) for f in coeffs)
    rows = [np.stack([f1, f2, f3], -1), np.stack([f3, f1, f2], -1), np.stack([f2, f3, f1], -1)]
    return np.stack(rows, axis=-2)


def rotation_matrix(theta):
    """M(theta): rotation by ``theta`` about the gray axis."""
    return circulant(rotation_coeffs(theta))


def rotation_matrix_deriv(theta):
    return circulant(rotation_coeffs_deriv(theta))


def apply_color_rotation(s, theta, v):
    """Scale-and-rotate ``s * M(theta) @ v``; broadcasts over leading axes."""
    m = rotation_matrix(theta)
    v = np.asarray(v, dtype=float)
    return np.asarray(s)[..., None] * np.einsum("...pq,...q->...p", m, v)
