import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcnn import metrics


def test_accuracy_from_labels_and_scores():
    assert metrics.accuracy([1, 2, 3, 0], [1, 2, 0, 0]) == 0.75
    scores = np.array([[0.1, 0.9], [0.8, 0.2]])
    assert metrics.accuracy(scores, [1, 1]) == 0.5


def test_accuracy_empty_rejected():
    with pytest.raises(ValueError):
        metrics.accuracy([], [])


def test_psnr_hand_values():
    a = np.zeros((4, 4, 3))
    b = np.full((4, 4, 3), 0.1)
    assert metrics.psnr(a, b) == pytest.approx(20.0, abs=1e-12)
    assert metrics.psnr(a, np.ones_like(a)) == pytest.approx(0.0, abs=1e-12)
    assert metrics.psnr(b, b) == math.inf


def test_psnr_clamps_inputs():
    a = np.full((2, 2, 3), 1.7)
    assert metrics.psnr(a, np.ones_like(a)) == math.inf


def test_psnr_shape_mismatch():
    with pytest.raises(ValueError):
        metrics.psnr(np.zeros((2, 2, 3)), np.zeros((2, 3, 3)))


@given(st.floats(1e-4, 0.5), st.floats(1e-4, 0.5))
def test_psnr_monotone_in_error(e1, e2):
    ref = np.full((3, 3, 3), 0.5)
    p1, p2 = metrics.psnr(ref + e1, ref), metrics.psnr(ref + e2, ref)
    assert (p1 >= p2) == (e1 <= e2) or math.isclose(p1, p2)


def test_saturation_and_gray_angle():
    gray = np.full((2, 2, 3), 0.4)
    red = np.zeros((2, 2, 3))
    red[..., 0] = 1.0
    assert metrics.mean_saturation(gray) == 0.0
    assert metrics.mean_saturation(red) == 1.0
    assert metrics.mean_saturation(np.zeros((2, 2, 3))) == 0.0
    assert metrics.mean_gray_angle(gray) == pytest.approx(0.0, abs=1e-7)
    assert metrics.mean_gray_angle(red) == pytest.approx(math.acos(1 / math.sqrt(3)), abs=1e-12)


def test_paired_row_sign():
    clean = np.full((4, 4, 3), 0.5)
    row = metrics.paired_row("x", clean, clean + 0.1, clean + 0.01)
    assert row[0] == "x"
    assert row[5] == pytest.approx(row[4] - row[3])
    assert row[5] > 0


def test_epoch_csv_round_trip(tmp_path):
    recs = [metrics.EpochRecord(1, 0.5, 0.25, 0.0), metrics.EpochRecord(2, 0.1234567891, 0.3, 1.5)]
    path = tmp_path / "m.csv"
    metrics.write_metrics_csv(recs, path)
    text = path.read_text()
    assert text.splitlines()[0] == "epoch,train_loss,eval_metric,wall_secs"
    assert "0.123457" in text
    back = metrics.read_metrics_csv(path)
    assert back[0] == recs[0]
    assert back[1].train_loss == pytest.approx(0.123457)


def test_read_rejects_wrong_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        metrics.read_metrics_csv(path)


def test_paired_csv(tmp_path):
    path = tmp_path / "p.csv"
    metrics.write_paired_csv([("img0", 0.5, 0.25, 20.0, 21.0, 1.0)], path)
    assert path.read_text().splitlines() == ["image_id,S,A,psnr_real,psnr_quat,D", "img0,0.5,0.25,20,21,1"]
