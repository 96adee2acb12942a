"""Dataset loading, augmentation and noise injection.

Images are float arrays of shape (H, W, 3) with values in [0, 1]; batches
stack them along a leading axis.
"""

import logging
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

log = logging.getLogger(__name__)

CIFAR_RECORD = 1 + 3 * 32 * 32
CIFAR_CLASSES = 10
CIFAR_TRAIN_FILES = [f"data_batch_{i}.bin" for i in range(1, 6)]
CIFAR_TEST_FILES = ["test_batch.bin"]


@dataclass
class LabeledImageSet:
    images: np.ndarray
    labels: np.ndarray
    n_classes: int

    def __post_init__(self):
        if len(self.images) != len(self.labels):
            raise ValueError(f"{len(self.images)} images but {len(self.labels)} labels")
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise ValueError(f"labels must lie in [0, {self.n_classes})")

    def __len__(self):
        return len(self.images)


@dataclass
class DenoisePairSet:
    clean: np.ndarray
    noisy: np.ndarray

    def __post_init__(self):
        if self.clean.shape != self.noisy.shape:
            raise ValueError(f"clean {self.clean.shape} and noisy {self.noisy.shape} shapes differ")

    def __len__(self):
        return len(self.clean)


def parse_cifar10_records(raw, limit=None):
    """Decode CIFAR-10 binary records: 1 label byte + channel-planar 32x32 RGB."""
    raw = np.frombuffer(raw, dtype=np.uint8)
    if raw.size % CIFAR_RECORD:
        raise ValueError(f"CIFAR-10 data length {raw.size} is not a multiple of {CIFAR_RECORD}-byte records")
    rec = raw.reshape(-1, CIFAR_RECORD)
    if limit is not None:
        rec = rec[:limit]
    labels = rec[:, 0].astype(np.int64)
    if labels.size and labels.max() >= CIFAR_CLASSES:
        raise ValueError(f"CIFAR-10 label {labels.max()} out of range")
    images = rec[:, 1:].reshape(-1, 3, 32, 32).transpose(0, 2, 3, 1).astype(np.float32) / 255.0
    return images, labels


def load_cifar10(path, split="train", subset=None):
    """Load CIFAR-10 from a binary batch file or the extracted batch directory.

    ``subset`` keeps the first ``subset`` records (in file order).
    """
    path = Path(path)
    if path.is_dir():
        names = CIFAR_TRAIN_FILES if split == "train" else CIFAR_TEST_FILES
        files = [path / n for n in names]
        missing = [str(f) for f in files if not f.exists()]
        if missing:
            raise FileNotFoundError(f"missing CIFAR-10 batch files: {', '.join(missing)}")
    elif path.exists():
        files = [path]
    else:
        raise FileNotFoundError(f"no CIFAR-10 data at {path}")
    images, labels, remaining = [], [], subset
    for f in files:
        if remaining is not None and remaining <= 0:
            break
        im, lb = parse_cifar10_records(f.read_bytes(), remaining)
        images.append(im)
        labels.append(lb)
        if remaining is not None:
            remaining -= len(lb)
    return LabeledImageSet(np.concatenate(images), np.concatenate(labels), CIFAR_CLASSES)


def write_cifar10_records(path, images, labels):
    """Inverse of ``parse_cifar10_records`` (images in [0, 1], rounded to bytes)."""
    px = np.clip(np.round(np.asarray(images) * 255.0), 0, 255).astype(np.uint8)
    planar = px.transpose(0, 3, 1, 2).reshape(len(px), CIFAR_RECORD - 1)
    rec = np.concatenate([np.asarray(labels, dtype=np.uint8)[:, None], planar], axis=1)
    Path(path).write_bytes(rec.tobytes())


def center_crop_resize(img, size=128):
    """Center-crop a PIL image to a square, then bilinear-resize to ``size``."""
    w, h = img.size
    side = min(w, h)
    left, top = (w - side) // 2, (h - side) // 2
    img = img.crop((left, top, left + side, top + side))
    if side != size:
        img = img.resize((size, size), Image.BILINEAR)
    return np.asarray(img, dtype=np.float32) / 255.0


def load_image_folder(path, size=128):
    """Read every PPM/PNG file in ``path`` (sorted by name) as a size x size image."""
    path = Path(path)
    files = sorted(p for p in path.iterdir() if p.suffix.lower() in (".png", ".ppm"))
    images = []
    for f in files:
        try:
            with Image.open(f) as img:
                images.append(center_crop_resize(img.convert("RGB"), size))
        except (OSError, ValueError) as exc:
            log.warning("skipping unreadable image %s: %s", f, exc)
    if not images:
        raise ValueError(f"no readable PNG/PPM images in {path}")
    return np.stack(images)


def save_image(path, img):
    """Write an (H, W, 3) image in [0, 1] as PNG or PPM (by extension)."""
    px = np.clip(np.round(np.clip(img, 0, 1) * 255.0), 0, 255).astype(np.uint8)
    fmt = "PPM" if os.fspath(path).lower().endswith(".ppm") else "PNG"
    Image.fromarray(px, "RGB").save(path, format=fmt)


def augment_shift_flip(img, rng, max_shift=4, flip=None, shift=None):
    """Random horizontal flip (p = 0.5) and integer shift with zero fill.

    ``flip`` and ``shift=(dy, dx)`` override the random draws.
    """
    if flip is None:
        flip = rng.random() < 0.5
    if shift is None:
        shift = rng.integers(-max_shift, max_shift + 1, size=2)
    out = img[:, ::-1] if flip else img
    dy, dx = int(shift[0]), int(shift[1])
    if dy == 0 and dx == 0:
        return out.copy() if flip else out
    h, w = out.shape[:2]
    res = np.zeros_like(out)
    ys, yd = (slice(0, h - dy), slice(dy, h)) if dy >= 0 else (slice(-dy, h), slice(0, h + dy))
    xs, xd = (slice(0, w - dx), slice(dx, w)) if dx >= 0 else (slice(-dx, w), slice(0, w + dx))
    res[yd, xd] = out[ys, xs]
    return res


def augment_batch(images, rng, max_shift=4):
    return np.stack([augment_shift_flip(im, rng, max_shift) for im in images])


def add_salt_pepper(img, ratio, rng):
    """Set floor(ratio * H * W) whole pixels to black or white (50/50)."""
    h, w = img.shape[:2]
    count = int(np.floor(ratio * h * w))
    out = img.copy()
    if count == 0:
        return out
    sites = rng.choice(h * w, size=count, replace=False)
    values = rng.integers(0, 2, size=count).astype(img.dtype)
    flat = out.reshape(h * w, -1)
    flat[sites] = values[:, None]
    return out


def add_gaussian(img, variance, rng):
    """Add N(0, variance) noise independently per channel, then clamp to [0, 1]."""
    if variance == 0:
        return img.copy()
    noise = rng.normal(0.0, np.sqrt(variance), size=img.shape)
    return np.clip(img + noise, 0.0, 1.0).astype(img.dtype)


def corrupt(img, rng, sp_ratio=0.30, variance=0.01):
    """Salt-and-pepper followed by Gaussian noise."""
    return add_gaussian(add_salt_pepper(img, sp_ratio, rng), variance, rng)


def make_denoise_pairs(clean, rng, sp_ratio=0.30, variance=0.01):
    noisy = np.stack([corrupt(im, rng, sp_ratio, variance) for im in clean])
    return DenoisePairSet(clean, noisy)
