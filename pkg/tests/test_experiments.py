import numpy as np
import pytest

from qcnn import experiments
from qcnn.experiments import RunConfig


def test_defaults_fill_from_preset():
    cfg = RunConfig(preset="denoiser").resolved()
    assert (cfg.optimizer, cfg.lr, cfg.epochs, cfg.batch_size) == ("adam", 1e-3, 50, 32)
    cfg = RunConfig(preset="shallow-cifar", lr=5e-4).resolved()
    assert cfg.optimizer == "rmsprop" and cfg.lr == 5e-4 and cfg.hyper() == {"lr": 5e-4, "decay": 1e-6}


@pytest.mark.parametrize(
    "kwargs, message",
    [
        ({"preset": "lenet"}, "unknown preset"),
        ({"precision": "half"}, "precision"),
        ({"eval_split": "val"}, "eval split"),
        ({"optimizer": "lbfgs"}, "unknown optimizer"),
        ({"epochs": 0}, "positive"),
        ({"subset": 0}, "subset"),
    ],
)
def test_invalid_configs(kwargs, message):
    with pytest.raises(ValueError, match=message):
        RunConfig(**kwargs).resolved()


def test_streams_are_independent_and_seeded():
    a = [g.random() for g in experiments._streams(4)]
    b = [g.random() for g in experiments._streams(4)]
    assert a == b
    assert len(set(a)) == 4


def test_image_layout_round_trip(rng):
    imgs = rng.random((2, 4, 4, 3))
    for q in (False, True):
        x = experiments.images_to_input(imgs, q, np.float64)
        assert x.shape == ((2, 1, 3, 4, 4) if q else (2, 3, 4, 4))
        np.testing.assert_array_equal(experiments.output_to_images(x, q), imgs)


def test_output_clamped():
    out = np.full((1, 3, 2, 2), 1.5)
    assert experiments.output_to_images(out, False).max() == 1.0


def test_test_noise_ignores_training_subset(image_dir):
    _, _, _, full = experiments.train_denoiser(
        RunConfig(preset="denoiser", dataset=str(image_dir), width=2, epochs=1, quaternion=True)
    )
    _, _, _, part = experiments.train_denoiser(
        RunConfig(preset="denoiser", dataset=str(image_dir), width=2, epochs=1, quaternion=True, subset=2)
    )
    np.testing.assert_array_equal(full.noisy, part.noisy)


def test_banner_lists_run(image_dir):
    cfg = RunConfig(preset="denoiser", dataset=str(image_dir), width=2, epochs=1).resolved()
    net = experiments.build_network(cfg, np.random.default_rng(0))
    text = experiments.banner(cfg, net)
    for key in ("preset=denoiser", "seed=0", "precision=single", f"params={net.n_params}", "sp_ratio=0.3"):
        assert key in text


def test_missing_folders(tmp_path):
    with pytest.raises(FileNotFoundError):
        experiments.load_denoise_folders(tmp_path)
