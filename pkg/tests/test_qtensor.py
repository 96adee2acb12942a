import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qcnn import qtensor

dims = st.integers(1, 4)


@st.composite
def qmaps(draw, batch=False):
    shape = (draw(dims), 3, draw(dims), draw(dims))
    if batch:
        shape = (draw(dims),) + shape
    return draw(arrays(np.float64, shape, elements=st.floats(-10, 10)))


def test_rgb_round_trip_and_layout():
    img = np.random.default_rng(0).random((5, 4, 3))
    m = qtensor.from_rgb_image(img)
    assert m.shape == (1, 3, 5, 4)
    np.testing.assert_array_equal(m[0, 0], img[..., 0])  # red -> i
    np.testing.assert_array_equal(m[0, 2], img[..., 2])  # blue -> k
    np.testing.assert_array_equal(qtensor.to_rgb_image(m), img)


@pytest.mark.parametrize("shape", [(4, 4), (4, 4, 4), (2, 4, 4, 3)])
def test_rgb_rejects_bad_shape(shape):
    with pytest.raises(qtensor.ShapeError):
        qtensor.from_rgb_image(np.zeros(shape))


@pytest.mark.parametrize("value", [-0.1, 1.5, np.nan])
def test_rgb_rejects_out_of_range(value):
    img = np.zeros((2, 2, 3))
    img[0, 0, 0] = value
    with pytest.raises(ValueError):
        qtensor.from_rgb_image(img)


def test_batch_image_bridge():
    imgs = np.random.default_rng(1).random((3, 4, 5, 3))
    m = qtensor.images_to_qmaps(imgs)
    assert m.shape == (3, 1, 3, 4, 5)
    np.testing.assert_array_equal(m[1], qtensor.from_rgb_image(imgs[1]))
    np.testing.assert_array_equal(qtensor.qmaps_to_images(m), imgs)


@given(qmaps(batch=True))
def test_split_merge_round_trip(m):
    r = qtensor.split_to_real(m)
    assert r.shape[-3] == 3 * m.shape[-4]
    np.testing.assert_array_equal(qtensor.merge_from_real(r), m)


def test_split_channel_order():
    m = np.arange(2 * 3 * 1 * 1).reshape(2, 3, 1, 1)
    np.testing.assert_array_equal(qtensor.split_to_real(m)[:, 0, 0], [0, 1, 2, 3, 4, 5])


def test_merge_rejects_non_multiple_of_three():
    with pytest.raises(qtensor.ShapeError):
        qtensor.merge_from_real(np.zeros((4, 2, 2)))


@given(qmaps())
def test_flatten_round_trip_and_order(m):
    v = qtensor.flatten_quaternion(m)
    assert v.shape == (m.size,)
    np.testing.assert_array_equal(v[:3], m[0, :, 0, 0])
    np.testing.assert_array_equal(qtensor.unflatten_quaternion(v, m.shape), m)


@given(qmaps(batch=True))
def test_qvector_round_trip(m):
    v = qtensor.to_qvector(m)
    assert v.shape[-1] == 3
    np.testing.assert_array_equal(qtensor.from_qvector(v, m.shape[1:]), m)


def test_embed_grayscale():
    plane = np.arange(6.0).reshape(2, 3)
    m = qtensor.embed_grayscale(plane)
    assert m.shape == (1, 3, 2, 3)
    for p in range(3):
        np.testing.assert_array_equal(m[0, p], plane)
