"""Regenerate datasets/denoise128 from colour photos bundled with common Python packages.

Crops are random squares (side between 128 px and the short edge of the
photo) resized to 128x128.  Train and test come from disjoint photos so the
test set measures generalization to unseen scenes.

    python3 scripts/make_denoise_corpus.py [--out datasets/denoise128] [--seed 0]
"""

import argparse
import importlib.util
from pathlib import Path

import numpy as np
from PIL import Image

from qcnn.data import center_crop_resize, save_image

# (package, relative path) -- located without importing the package
TRAIN_SOURCES = [
    ("skimage", "data/astronaut.png"),
    ("skimage", "data/chelsea.png"),
    ("skimage", "data/coffee.png"),
    ("skimage", "data/hubble_deep_field.jpg"),
    ("skimage", "data/ihc.png"),
    ("skimage", "data/motorcycle_left.png"),
    ("skimage", "data/motorcycle_right.png"),
    ("skimage", "data/retina.jpg"),
    ("skimage", "data/rocket.jpg"),
]
TEST_SOURCES = [
    ("sklearn", "datasets/images/china.jpg"),
    ("sklearn", "datasets/images/flower.jpg"),
    ("matplotlib", "mpl-data/sample_data/grace_hopper.jpg"),
]


def locate(package, rel):
    spec = importlib.util.find_spec(package)
    if spec is None or not spec.submodule_search_locations:
        raise FileNotFoundError(f"package {package} is not installed")
    return Path(list(spec.submodule_search_locations)[0]) / rel


def random_crops(img, count, rng, size=128):
    w, h = img.size
    out = []
    for _ in range(count):
        side = int(rng.integers(size, min(w, h) + 1))
        left = int(rng.integers(0, w - side + 1))
        top = int(rng.integers(0, h - side + 1))
        out.append(center_crop_resize(img.crop((left, top, left + side, top + side)), size))
    return out


def build(out_dir, sources, per_source, rng):
    out_dir.mkdir(parents=True, exist_ok=True)
    for package, rel in sources:
        path = locate(package, rel)
        with Image.open(path) as img:
            crops = random_crops(img.convert("RGB"), per_source, rng)
        for i, crop in enumerate(crops):
            save_image(out_dir / f"{path.stem}_{i:02d}.png", crop)
    return len(sources) * per_source


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="datasets/denoise128")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--train-per-photo", type=int, default=23)
    ap.add_argument("--test-per-photo", type=int, default=16)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    out = Path(args.out)
    n_train = build(out / "train", TRAIN_SOURCES, args.train_per_photo, rng)
    n_test = build(out / "test", TEST_SOURCES, args.test_per_photo, rng)
    print(f"wrote {n_train} train and {n_test} test images under {out}")


if __name__ == "__main__":
    main()
