import math

import numpy as np
import pytest

from qcnn import optim, training
from qcnn.checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from qcnn.network import Network
from qcnn.presets import build_preset


def tiny_classifier(quaternion=True, dtype=np.float32):
    spec = build_preset("shallow-cifar", quaternion, 1.0, widths=(2, 2, 2, 2), hidden=3, size=8)
    return Network(spec, dtype)


def test_init_bounds_and_zero_bias(rng):
    net = tiny_classifier()
    training.init_quaternion_params(net, rng)
    for layer in net.layers:
        fan_in, fan_out = layer.fans()
        for name, arr in layer.params.items():
            role = layer.param_roles()[name]
            if role == "angle":
                assert np.abs(arr).max() <= math.pi / 2
            elif role in ("scale", "weight"):
                bound = training.init_bound(fan_in, fan_out)
                assert np.abs(arr).max() <= bound
                assert np.abs(arr).max() > 0.5 * bound
            else:
                assert not arr.any()


def test_init_bound_value():
    # 3x3 conv, 1 -> 32 channels
    assert training.init_bound(9, 288) == pytest.approx(math.sqrt(6 / 297))


def test_init_bound_holds_after_float32_rounding():
    b = training._bound_in_dtype(math.pi / 2, np.dtype(np.float32))
    assert float(b) <= math.pi / 2


def test_init_is_seeded():
    a, b = tiny_classifier(), tiny_classifier()
    pa = training.init_quaternion_params(a, np.random.default_rng(3))
    pb = training.init_quaternion_params(b, np.random.default_rng(3))
    for x, y in zip(pa, pb):
        np.testing.assert_array_equal(x, y)


def test_cross_entropy_values():
    probs = np.array([[0.7, 0.2, 0.1], [0.25, 0.25, 0.5]])
    loss, grad = training.cross_entropy_loss(probs, np.array([0, 2]))
    assert loss == pytest.approx(-(math.log(0.7) + math.log(0.5)) / 2)
    np.testing.assert_allclose(grad, [[-0.15, 0.1, 0.05], [0.125, 0.125, -0.25]])


def test_cross_entropy_clamps_zero_probability():
    loss, _ = training.cross_entropy_loss(np.array([1.0, 0.0]), np.array(1))
    assert loss == pytest.approx(-math.log(1e-12))


def test_cross_entropy_label_range():
    with pytest.raises(ValueError):
        training.cross_entropy_loss(np.full((1, 3), 1 / 3), np.array([3]))


def test_mse_values_and_shape_check():
    loss, grad = training.mse_loss(np.array([1.0, 3.0]), np.array([0.0, 0.0]))
    assert loss == 5.0
    np.testing.assert_array_equal(grad, [1.0, 3.0])
    with pytest.raises(ValueError):
        training.mse_loss(np.zeros(2), np.zeros(3))


def test_sgd_step():
    p = [np.array([1.0, 2.0])]
    st = optim.make_state("sgd", p, lr=0.5)
    optim.step(p, [np.array([2.0, -2.0])], st)
    np.testing.assert_array_equal(p[0], [0.0, 3.0])
    assert st.step == 1


def test_rmsprop_two_steps_by_hand():
    p = [np.array([1.0])]
    st = optim.make_state("rmsprop", p, lr=0.1, decay=0.5)
    g = 2.0
    acc = 0.1 * g * g
    expected = 1.0 - 0.1 * g / (math.sqrt(acc) + 1e-8)
    optim.step(p, [np.array([g])], st)
    assert p[0][0] == pytest.approx(expected, rel=1e-12)
    acc = 0.9 * acc + 0.1 * g * g
    expected -= 0.1 / 1.5 * g / (math.sqrt(acc) + 1e-8)
    optim.step(p, [np.array([g])], st)
    assert p[0][0] == pytest.approx(expected, rel=1e-12)


def test_adam_matches_textbook_form():
    rng = np.random.default_rng(0)
    p = [rng.normal(size=5)]
    ref = p[0].copy()
    st = optim.make_state("adam", p, lr=0.01)
    m = np.zeros(5)
    v = np.zeros(5)
    for t in range(1, 6):
        g = rng.normal(size=5)
        optim.step(p, [g], st)
        m = 0.9 * m + 0.1 * g
        v = 0.999 * v + 0.001 * g * g
        ref -= 0.01 * (m / (1 - 0.9**t)) / (np.sqrt(v / (1 - 0.999**t)) + 1e-8)
    np.testing.assert_allclose(p[0], ref, rtol=1e-10)


def test_optimizer_argument_checks():
    with pytest.raises(ValueError, match="unknown optimizer"):
        optim.make_state("lbfgs", [])
    with pytest.raises(ValueError, match="does not take"):
        optim.make_state("sgd", [], rho=0.9)
    st = optim.make_state("sgd", [np.zeros(2)])
    with pytest.raises(ValueError, match="gradient shape"):
        optim.step([np.zeros(2)], [np.zeros(3)], st)
    with pytest.raises(ValueError):
        optim.step([np.zeros(2)], [], st)


def _epoch_run(seed):
    net = tiny_classifier()
    training.init_quaternion_params(net, np.random.default_rng(seed))
    data_rng = np.random.default_rng(100)
    x = data_rng.random((12, 1, 3, 8, 8)).astype(np.float32)
    y = data_rng.integers(0, 10, 12)
    st = optim.make_state("adam", [a for _, a in net.parameters()])
    losses = [training.train_epoch(net, x, y, "cross_entropy", st, 5, np.random.default_rng(seed)).loss for _ in range(3)]
    return net, st, losses


def test_train_epoch_is_deterministic_and_learns():
    net_a, st_a, la = _epoch_run(1)
    net_b, _, lb = _epoch_run(1)
    assert la == lb
    assert la[-1] < la[0]
    for (_, a), (_, b) in zip(net_a.parameters(), net_b.parameters()):
        np.testing.assert_array_equal(a, b)
    assert st_a.step == 9  # three epochs of ceil(12 / 5) batches


def test_train_epoch_input_checks(rng):
    net = tiny_classifier()
    st = optim.make_state("sgd", [a for _, a in net.parameters()])
    with pytest.raises(ValueError, match="empty"):
        training.train_epoch(net, np.zeros((0, 1, 3, 8, 8)), np.zeros(0), "mse", st, 4, rng)
    with pytest.raises(ValueError, match="targets"):
        training.train_epoch(net, np.zeros((2, 1, 3, 8, 8)), np.zeros(3), "mse", st, 4, rng)


def test_transform_sees_each_batch(rng):
    net = tiny_classifier()
    st = optim.make_state("sgd", [a for _, a in net.parameters()])
    sizes = []

    def transform(batch, _rng):
        sizes.append(len(batch))
        return batch

    x = rng.random((7, 1, 3, 8, 8)).astype(np.float32)
    training.train_epoch(net, x, rng.integers(0, 10, 7), "cross_entropy", st, 3, rng, transform)
    assert sizes == [3, 3, 1]


# -- checkpoints -------------------------------------------------------------


def test_checkpoint_round_trip_is_bit_exact(tmp_path):
    net, st, _ = _epoch_run(2)
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, net, st, seed=2, extra={"note": "x"})
    net2, st2, manifest = load_checkpoint(path)
    x = np.random.default_rng(9).random((3, 1, 3, 8, 8)).astype(np.float32)
    assert net.forward(x).tobytes() == net2.forward(x).tobytes()
    assert manifest["seed"] == 2 and manifest["extra"] == {"note": "x"}
    assert st2.name == "adam" and st2.step == st.step and st2.hyper == st.hyper
    for name in st.buffers:
        for a, b in zip(st.buffers[name], st2.buffers[name]):
            np.testing.assert_array_equal(a, b)


def test_checkpoint_without_optimizer(tmp_path):
    net = tiny_classifier(quaternion=False)
    training.init_quaternion_params(net, np.random.default_rng(0))
    save_checkpoint(tmp_path / "m.ckpt", net)
    net2, st, _ = load_checkpoint(tmp_path / "m.ckpt")
    assert st is None
    assert net2.spec == net.spec


@pytest.mark.parametrize(
    "mangle, message",
    [
        (lambda b: b"XXXX" + b[4:], "magic"),
        (lambda b: b[:4] + bytes([9]) + b[5:], "version"),
        (lambda b: b[:-7], "truncated"),
        (lambda b: b + b"\x00", "trailing"),
        (lambda b: b[:2], "truncated"),
    ],
)
def test_checkpoint_corruption_detected(tmp_path, mangle, message):
    net, st, _ = _epoch_run(0)
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, net, st)
    path.write_bytes(mangle(path.read_bytes()))
    with pytest.raises(CheckpointError, match=message):
        load_checkpoint(path)
