"""Containers and bridges between quaternion and real feature maps.

Layouts (a leading batch axis is allowed everywhere):

* quaternion feature map: ``(C, 3, H, W)``; the three entries of axis -3 are
  the i, j, k parts.  The real part is always zero and never stored.
* real feature map: ``(C, H, W)``.
* quaternion vector: ``(N, 3)``.

``split_to_real`` orders output channels channel-major, part-minor
(``out[3c + p] = m[c, p]``).  ``flatten_quaternion`` iterates ``c, h, w, part``.
"""

import numpy as np


class ShapeError(ValueError):
    pass


def from_rgb_image(pixels):
    """H x W x 3 image in [0, 1] -> single-channel quaternion map (1, 3, H, W)."""
    pixels = np.asarray(pixels)
    if pixels.ndim != 3 or pixels.shape[-1] != 3:
        raise ShapeError(f"expected an H x W x 3 image, got shape {pixels.shape}")
    if not np.all(np.isfinite(pixels)) or pixels.min() < 0.0 or pixels.max() > 1.0:
        raise ValueError("pixel values must lie in [0, 1]")
    return np.ascontiguousarray(np.moveaxis(pixels, -1, 0)[None])


def to_rgb_image(m):
    m = np.asarray(m)
    if m.ndim != 4 or m.shape[0] != 1 or m.shape[1] != 3:
        raise ShapeError(f"to_rgb_image needs a (1, 3, H, W) map, got {m.shape}")
    return np.ascontiguousarray(np.moveaxis(m[0], 0, -1))


def images_to_qmaps(images):
    """Batch version of ``from_rgb_image``: (N, H, W, 3) -> (N, 1, 3, H, W)."""
    images = np.asarray(images)
    return np.ascontiguousarray(np.moveaxis(images, -1, 1)[:, None])


def qmaps_to_images(m):
    m = np.asarray(m)
    if m.shape[1] != 1:
        raise ShapeError(f"expected one quaternion channel, got {m.shape[1]}")
    return np.ascontiguousarray(np.moveaxis(m[:, 0], 1, -1))


def split_to_real(m):
    m = np.asarray(m)
    c, parts, h, w = m.shape[-4:]
    if parts != 3:
        raise ShapeError(f"axis -3 must hold 3 imaginary parts, got {parts}")
    return m.reshape(m.shape[:-4] + (3 * c, h, w))


def merge_from_real(r):
    """Inverse of ``split_to_real``; channel count must be divisible by 3."""
    r = np.asarray(r)
    c3, h, w = r.shape[-3:]
    if c3 % 3:
        raise ShapeError(f"channel count {c3} is not a multiple of 3")
    return r.reshape(r.shape[:-3] + (c3 // 3, 3, h, w))


def flatten_quaternion(m):
    m = np.asarray(m)
    # (..., C, 3, H, W) -> (..., C, H, W, 3) -> (..., 3CHW)
    moved = np.moveaxis(m, -3, -1)
    return moved.reshape(m.shape[:-4] + (-1,))


def unflatten_quaternion(v, shape):
    """Inverse of ``flatten_quaternion`` for a map of shape ``(C, 3, H, W)``."""
    c, _, h, w = shape
    v = np.asarray(v)
    return np.moveaxis(v.reshape(v.shape[:-1] + (c, h, w, 3)), -1, -3)


def to_qvector(m):
    """Quaternion map (..., C, 3, H, W) -> quaternion vector (..., C*H*W, 3)."""
    m = np.asarray(m)
    return np.moveaxis(m, -3, -1).reshape(m.shape[:-4] + (-1, 3))


def from_qvector(v, shape):
    c, _, h, w = shape
    v = np.asarray(v)
    return np.moveaxis(v.reshape(v.shape[:-2] + (c, h, w, 3)), -1, -3)


def embed_grayscale(img):
    """H x W plane -> (1, 3, H, W) map with all three parts equal."""
    img = np.asarray(img, dtype=float)
    return np.repeat(img[None, None], 3, axis=1)
