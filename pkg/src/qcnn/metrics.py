"""Evaluation metrics and CSV reporting."""

import csv
import math
from dataclasses import astuple, dataclass

import numpy as np

EPOCH_HEADER = ["epoch", "train_loss", "eval_metric", "wall_secs"]
PAIRED_HEADER = ["image_id", "S", "A", "psnr_real", "psnr_quat", "D"]


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    eval_metric: float
    wall_secs: float


def accuracy(predictions, labels):
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.ndim == 2:
        predictions = predictions.argmax(axis=1)
    if len(labels) == 0:
        raise ValueError("accuracy of an empty set is undefined")
    return float(np.mean(predictions == labels))


def psnr(output, reference, peak=1.0):
    """PSNR in dB with both images clamped to [0, peak]; identical images give inf."""
    a = np.clip(np.asarray(output, dtype=np.float64), 0, peak)
    b = np.clip(np.asarray(reference, dtype=np.float64), 0, peak)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def mean_psnr(outputs, references):
    return float(np.mean([psnr(o, r) for o, r in zip(outputs, references)]))


def mean_saturation(img):
    """Mean HSV saturation (max - min) / max; black pixels count as 0."""
    img = np.asarray(img, dtype=np.float64).reshape(-1, 3)
    mx = img.max(axis=1)
    mn = img.min(axis=1)
    sat = np.divide(mx - mn, mx, out=np.zeros_like(mx), where=mx > 0)
    return float(sat.mean())


def mean_gray_angle(img):
    """Mean angle (radians) between each pixel's colour vector and the gray axis."""
    img = np.asarray(img, dtype=np.float64).reshape(-1, 3)
    norm = np.linalg.norm(img, axis=1)
    cos = np.divide(img.sum(axis=1) / math.sqrt(3.0), norm, out=np.ones_like(norm), where=norm > 0)
    return float(np.arccos(np.clip(cos, -1.0, 1.0)).mean())


def psnr_difference(psnr_a, psnr_b):
    """Signed ``psnr_a - psnr_b`` in dB."""
    return psnr_a - psnr_b


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return f"{float(v):.6g}"


def write_metrics_csv(records, path):
    """Write ``EpochRecord`` rows under the fixed header; 6 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EPOCH_HEADER)
        for r in records:
            w.writerow([_fmt(v) for v in astuple(r)])


def read_metrics_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != EPOCH_HEADER:
        raise ValueError(f"{path} does not start with header {','.join(EPOCH_HEADER)}")
    out = []
    for row in rows[1:]:
        out.append(EpochRecord(int(row[0]), *(float(v) for v in row[1:])))
    return out


def paired_row(image_id, clean, restored_real, restored_quat):
    """One row of the colourfulness analysis: (id, S, A, psnr_real, psnr_quat, D).

    D is the quaternion model's PSNR advantage, ``psnr_quat - psnr_real``.
    """
    p_real = psnr(restored_real, clean)
    p_quat = psnr(restored_quat, clean)
    return (image_id, mean_saturation(clean), mean_gray_angle(clean), p_real, p_quat, psnr_difference(p_quat, p_real))


def write_paired_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PAIRED_HEADER)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
