import re

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

_CRITERIA = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def record_criterion():
    """Record one acceptance line: record_criterion(number, title, passed, detail)."""

    def record(number, title, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title}"
        if detail:
            line += f" -- {detail}"
        _CRITERIA.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    def order(item):
        number, suffix = re.match(r"(\d+)(.*)", str(item[0])).groups()
        return int(number), suffix

    for _, line in sorted(_CRITERIA, key=order):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def cifar_dir(tmp_path_factory):
    """Synthetic CIFAR-10 batch directory: 32 train and 16 test records."""
    from qcnn import data

    root = tmp_path_factory.mktemp("cifar")
    rng = np.random.default_rng(0)
    for name, n in [(f, 8) for f in data.CIFAR_TRAIN_FILES[:4]] + [(data.CIFAR_TRAIN_FILES[4], 0), ("test_batch.bin", 16)]:
        data.write_cifar10_records(root / name, rng.random((n, 32, 32, 3)), rng.integers(0, 10, n))
    return root


@pytest.fixture(scope="session")
def image_dir(tmp_path_factory):
    """Smooth synthetic colour images in train/ and test/ folders."""
    from qcnn import data

    root = tmp_path_factory.mktemp("images")
    rng = np.random.default_rng(1)
    yy, xx = np.mgrid[0:128, 0:128] / 127.0
    for split, n in (("train", 6), ("test", 3)):
        (root / split).mkdir()
        for i in range(n):
            phase = rng.uniform(0, 6, 3)
            img = 0.5 + 0.4 * np.sin(3 * xx[..., None] + 2 * yy[..., None] + phase)
            data.save_image(root / split / f"img{i:02d}.png", img)
    return root
