"""End-to-end training and evaluation runs for the classification and denoising presets.

A run is described by a :class:`RunConfig`; fields left as ``None`` take the
preset's defaults from ``PRESET_DEFAULTS``.  Randomness comes from one seed,
split into independent streams for initialization, shuffling and
augmentation, and noise, so changing one consumer never perturbs another.
"""

import dataclasses
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import data, metrics, optim, qtensor, training
from .checkpoint import save_checkpoint
from .network import Network
from .presets import PRESET_TASK, PRESETS, build_preset

log = logging.getLogger(__name__)

PRESET_DEFAULTS = {
    "shallow-cifar": {"optimizer": "rmsprop", "lr": 1e-4, "decay": 1e-6, "batch_size": 32, "epochs": 80, "augment": True},
    "denoiser": {"optimizer": "adam", "lr": 1e-3, "batch_size": 32, "epochs": 50, "augment": False},
    "vgg-s": {"optimizer": "adam", "lr": 1e-4, "batch_size": 64, "epochs": 50, "augment": True},
}
PRECISIONS = {"single": np.float32, "double": np.float64}


@dataclass
class RunConfig:
    preset: str = "shallow-cifar"
    dataset: Optional[str] = None
    subset: Optional[int] = None
    test_subset: Optional[int] = None
    epochs: Optional[int] = None
    batch_size: Optional[int] = None
    optimizer: Optional[str] = None
    lr: Optional[float] = None
    decay: Optional[float] = None
    seed: int = 0
    precision: str = "single"
    quaternion: bool = False
    filter_ratio: Optional[float] = None
    width: Optional[int] = None
    augment: Optional[bool] = None
    eval_split: str = "test"
    sp_ratio: float = 0.30
    variance: float = 0.01
    timing: bool = True
    stop_at: Optional[float] = None
    out: Optional[str] = None
    csv: Optional[str] = None

    def resolved(self):
        """Copy with preset defaults filled in; validates names and ranges."""
        if self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}; choose from {', '.join(PRESETS)}")
        if self.precision not in PRECISIONS:
            raise ValueError(f"precision must be 'single' or 'double', got {self.precision!r}")
        if self.eval_split not in ("train", "test"):
            raise ValueError(f"eval split must be 'train' or 'test', got {self.eval_split!r}")
        filled = {k: v for k, v in PRESET_DEFAULTS[self.preset].items() if getattr(self, k) is None}
        cfg = dataclasses.replace(self, **filled)
        if cfg.optimizer not in optim.DEFAULTS:
            raise ValueError(f"unknown optimizer {cfg.optimizer!r}; choose from {', '.join(sorted(optim.DEFAULTS))}")
        if cfg.epochs < 1 or cfg.batch_size < 1:
            raise ValueError("epochs and batch size must be positive")
        if cfg.subset is not None and cfg.subset < 1:
            raise ValueError("subset must be positive")
        return cfg

    @property
    def task(self):
        return PRESET_TASK[self.preset]

    def hyper(self):
        """Optimizer hyperparameters given explicitly or by the preset."""
        hp = {"lr": self.lr}
        if self.decay is not None and "decay" in optim.DEFAULTS[self.optimizer]:
            hp["decay"] = self.decay
        return hp


def _streams(seed):
    """Independent generators: (init, shuffle/augment, training noise, test noise)."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(4)]


def build_network(cfg, rng):
    overrides = {}
    if cfg.width is not None:
        if cfg.preset != "denoiser":
            raise ValueError("width applies to the denoiser preset only")
        overrides["width"] = cfg.width
    spec = build_preset(cfg.preset, cfg.quaternion, cfg.filter_ratio, **overrides)
    net = Network(spec, dtype=PRECISIONS[cfg.precision])
    training.init_quaternion_params(net, rng)
    return net


def images_to_input(images, quaternion, dtype):
    """(B, H, W, 3) images -> network input for either carrier."""
    if quaternion:
        return qtensor.images_to_qmaps(images).astype(dtype, copy=False)
    return np.ascontiguousarray(np.moveaxis(images, -1, 1)).astype(dtype, copy=False)


def output_to_images(out, quaternion):
    """Denoiser output -> (B, H, W, 3) images clamped to [0, 1]."""
    imgs = qtensor.qmaps_to_images(out) if quaternion else np.moveaxis(out, 1, -1)
    return np.clip(imgs, 0.0, 1.0)


def is_quaternion(net):
    return bool(net.layers[0].quaternion)


def banner(cfg, net):
    fields = {
        "preset": cfg.preset,
        "quaternion": cfg.quaternion,
        "filter_ratio": cfg.filter_ratio,
        "width": cfg.width,
        "dataset": cfg.dataset,
        "subset": cfg.subset,
        "test_subset": cfg.test_subset,
        "epochs": cfg.epochs,
        "batch_size": cfg.batch_size,
        "optimizer": cfg.optimizer,
        "hyper": {**optim.DEFAULTS[cfg.optimizer], **{k: v for k, v in cfg.hyper().items() if v is not None}},
        "augment": cfg.augment,
        "eval_split": cfg.eval_split,
        "stop_at": cfg.stop_at,
        "seed": cfg.seed,
        "precision": cfg.precision,
        "params": net.n_params,
    }
    if cfg.task == "denoise":
        fields.update(sp_ratio=cfg.sp_ratio, variance=cfg.variance)
    return "run " + " ".join(f"{k}={v}" for k, v in fields.items())


# -- classification ----------------------------------------------------------


def load_classification(cfg):
    if cfg.dataset is None:
        raise ValueError("classification runs need --dataset (CIFAR-10 binary batch directory or file)")
    train = data.load_cifar10(cfg.dataset, "train", cfg.subset)
    if cfg.eval_split == "train":
        return train, train
    return train, data.load_cifar10(cfg.dataset, "test", cfg.test_subset)


def evaluate_accuracy(net, images, labels, quaternion, batch_size=64):
    preds = []
    for lo in range(0, len(images), batch_size):
        x = images_to_input(images[lo : lo + batch_size], quaternion, net.dtype)
        preds.append(net.forward(x).argmax(axis=1))
    return metrics.accuracy(np.concatenate(preds), labels)


def train_classifier(cfg):
    """Returns ``(network, optimizer_state, epoch_records)``."""
    cfg = cfg.resolved()
    init_rng, order_rng, _, _ = _streams(cfg.seed)
    train_set, eval_set = load_classification(cfg)
    net = build_network(cfg, init_rng)
    log.info(banner(cfg, net))
    state = optim.make_state(cfg.optimizer, [a for _, a in net.parameters()], **cfg.hyper())
    dtype = net.dtype

    def transform(batch, rng):
        if cfg.augment:
            batch = data.augment_batch(batch, rng)
        return images_to_input(batch, cfg.quaternion, dtype)

    records = []
    for epoch in range(1, cfg.epochs + 1):
        start = time.perf_counter()
        stats = training.train_epoch(
            net, train_set.images, train_set.labels, training.softmax_cross_entropy, state, cfg.batch_size, order_rng, transform
        )
        acc = evaluate_accuracy(net, eval_set.images, eval_set.labels, cfg.quaternion)
        secs = time.perf_counter() - start if cfg.timing else 0.0
        records.append(metrics.EpochRecord(epoch, stats.loss, acc, secs))
        log.info("epoch %d loss %.6g %s accuracy %.4f (%.1fs)", epoch, stats.loss, cfg.eval_split, acc, secs)
        if cfg.stop_at is not None and acc >= cfg.stop_at:
            log.info("reached %s accuracy %.4f >= %.4f, stopping", cfg.eval_split, acc, cfg.stop_at)
            break
    _emit(cfg, net, state, records)
    return net, state, records


# -- denoising ---------------------------------------------------------------


def load_denoise_folders(path, subset=None, test_subset=None):
    """``path/train`` and ``path/test`` image folders -> (train images, test images)."""
    root = Path(path)
    if not (root / "train").is_dir() or not (root / "test").is_dir():
        raise FileNotFoundError(f"{root} needs train/ and test/ image folders")
    train = data.load_image_folder(root / "train")[:subset]
    test = data.load_image_folder(root / "test")[:test_subset]
    return train, test


def denoise_images(net, noisy, batch_size=16):
    """Run a denoiser over (B, H, W, 3) noisy images; returns clamped images."""
    q = is_quaternion(net)
    out = []
    for lo in range(0, len(noisy), batch_size):
        x = images_to_input(noisy[lo : lo + batch_size], q, net.dtype)
        out.append(output_to_images(net.forward(x), q))
    return np.concatenate(out)


def train_denoiser(cfg):
    """Returns ``(network, optimizer_state, epoch_records, test_pairs)``.

    Training pairs are re-corrupted every epoch from the noise stream; the
    test pairs are corrupted once, from a stream that does not depend on the
    training subset.
    """
    cfg = cfg.resolved()
    if cfg.dataset is None:
        raise ValueError("denoising runs need --dataset (folder with train/ and test/ images)")
    init_rng, order_rng, noise_rng, test_rng = _streams(cfg.seed)
    clean_train, clean_test = load_denoise_folders(cfg.dataset, cfg.subset, cfg.test_subset)
    test_pairs = data.make_denoise_pairs(clean_test, test_rng, cfg.sp_ratio, cfg.variance)
    net = build_network(cfg, init_rng)
    log.info(banner(cfg, net))
    baseline = metrics.mean_psnr(test_pairs.noisy, test_pairs.clean)
    log.info("corrupted test input PSNR %.3f dB over %d images", baseline, len(test_pairs))
    state = optim.make_state(cfg.optimizer, [a for _, a in net.parameters()], **cfg.hyper())
    targets = images_to_input(clean_train, cfg.quaternion, net.dtype)
    records = []
    for epoch in range(1, cfg.epochs + 1):
        start = time.perf_counter()
        noisy = data.make_denoise_pairs(clean_train, noise_rng, cfg.sp_ratio, cfg.variance).noisy
        inputs = images_to_input(noisy, cfg.quaternion, net.dtype)
        stats = training.train_epoch(net, inputs, targets, training.mse_loss, state, cfg.batch_size, order_rng)
        score = metrics.mean_psnr(denoise_images(net, test_pairs.noisy), test_pairs.clean)
        secs = time.perf_counter() - start if cfg.timing else 0.0
        records.append(metrics.EpochRecord(epoch, stats.loss, score, secs))
        log.info("epoch %d loss %.6g test PSNR %.3f dB (%.1fs)", epoch, stats.loss, score, secs)
        if cfg.stop_at is not None and score >= cfg.stop_at:
            log.info("reached test PSNR %.3f >= %.3f dB, stopping", score, cfg.stop_at)
            break
    _emit(cfg, net, state, records)
    return net, state, records, test_pairs


def _emit(cfg, net, state, records):
    if cfg.csv:
        metrics.write_metrics_csv(records, cfg.csv)
        log.info("wrote %s", cfg.csv)
    if cfg.out:
        save_checkpoint(cfg.out, net, state, seed=cfg.seed, extra={"run": dataclasses.asdict(cfg)})
        log.info("wrote %s", cfg.out)


def train(cfg):
    if cfg.task == "denoise":
        return train_denoiser(cfg)[:3]
    return train_classifier(cfg)
