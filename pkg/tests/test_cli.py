import subprocess
import sys

import pytest

from qcnn import cli, metrics


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_subcommands_exist():
    parser = cli.build_parser()
    assert set(parser.subcommands) == {"train", "eval", "denoise", "gradcheck", "audit"}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qcnn", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "gradcheck" in proc.stdout


def test_audit_output(capsys):
    assert run("audit", "--preset", "shallow-cifar", "--both", "--filter-ratio", "1") == 0
    out = capsys.readouterr().out
    assert "65376" in out and "129600" in out
    assert "ratio 1.982379" in out


@pytest.mark.parametrize(
    "argv",
    [
        ("audit", "--preset", "resnet"),
        ("train", "--epochs", "0", "--dataset", "x"),
        ("train",),
        ("eval", "--dataset", "x"),
        ("frobnicate",),
        ("audit", "--filter-ratio", "-1"),
    ],
)
def test_usage_errors_exit_2(argv):
    assert run(*argv) == 2


def test_missing_data_exits_1(tmp_path, capsys):
    assert run("train", "--dataset", tmp_path / "nothing", "--epochs", "1") == 1
    assert "error:" in capsys.readouterr().err


def test_width_rejected_for_classifier(cifar_dir):
    assert run("train", "--dataset", cifar_dir, "--width", "4", "--epochs", "1") == 1


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "audit.cfg"
    cfg.write_text("# audit settings\npreset = denoiser\nfilter-ratio = 1.0\nquaternion = true\n")
    assert run("audit", "--config", cfg) == 0
    assert "denoiser-q" in capsys.readouterr().out
    assert run("audit", "--config", cfg, "--preset", "vgg-s") == 0
    assert "vgg-s-q" in capsys.readouterr().out


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert run("audit", "--config", cfg) == 2


def test_train_then_eval_classifier(cifar_dir, tmp_path, capsys):
    ckpt, csv = tmp_path / "c.ckpt", tmp_path / "c.csv"
    code = run("train", "--dataset", cifar_dir, "--subset", 16, "--epochs", 2, "--batch-size", 8,
               "--no-augment", "--out", ckpt, "--csv", csv)
    assert code == 0
    recs = metrics.read_metrics_csv(csv)
    assert [r.epoch for r in recs] == [1, 2]
    assert all(0.0 <= r.eval_metric <= 1.0 for r in recs)
    capsys.readouterr()
    assert run("eval", "--checkpoint", ckpt, "--dataset", cifar_dir) == 0
    assert "on 16 test images" in capsys.readouterr().out


def test_train_stop_at(cifar_dir, tmp_path):
    csv = tmp_path / "s.csv"
    assert run("train", "--dataset", cifar_dir, "--subset", 8, "--epochs", 5, "--stop-at", 0.0, "--csv", csv) == 0
    assert len(metrics.read_metrics_csv(csv)) == 1


def test_denoiser_train_eval_and_compare(image_dir, tmp_path, capsys):
    q_ckpt, r_ckpt = tmp_path / "q.ckpt", tmp_path / "r.ckpt"
    common = ("train", "--preset", "denoiser", "--dataset", image_dir, "--width", 2, "--epochs", 1, "--batch-size", 3)
    assert run(*common, "--quaternion", "--out", q_ckpt) == 0
    assert run(*common, "--out", r_ckpt) == 0
    capsys.readouterr()

    assert run("eval", "--checkpoint", q_ckpt, "--dataset", image_dir) == 0
    assert "psnr" in capsys.readouterr().out

    paired = tmp_path / "paired.csv"
    out_dir = tmp_path / "restored"
    assert run("denoise", "--checkpoint", q_ckpt, "--dataset", image_dir / "test", "--compare", r_ckpt,
               "--csv", paired, "--out", out_dir, "--format", "ppm") == 0
    lines = paired.read_text().splitlines()
    assert lines[0] == "image_id,S,A,psnr_real,psnr_quat,D"
    assert len(lines) == 4
    image_id, s, a, p_real, p_quat, d = lines[1].split(",")
    assert image_id == "img00"
    assert float(d) == pytest.approx(float(p_quat) - float(p_real), abs=2e-5 * max(1, abs(float(p_quat))))
    assert sorted(p.name for p in out_dir.iterdir()) == ["img00.ppm", "img01.ppm", "img02.ppm"]

    # same carrier twice is refused
    assert run("denoise", "--checkpoint", q_ckpt, "--dataset", image_dir / "test", "--compare", q_ckpt) == 1


def test_denoise_pre_corrupted_without_reference(image_dir, tmp_path, capsys):
    ckpt = tmp_path / "q.ckpt"
    assert run("train", "--preset", "denoiser", "--quaternion", "--dataset", image_dir, "--width", 2,
               "--epochs", 1, "--out", ckpt) == 0
    capsys.readouterr()
    assert run("denoise", "--checkpoint", ckpt, "--dataset", image_dir / "test", "--pre-corrupted") == 0
    assert "PSNR not computed" in capsys.readouterr().out


def test_denoise_rejects_classifier(cifar_dir, image_dir, tmp_path):
    ckpt = tmp_path / "c.ckpt"
    assert run("train", "--dataset", cifar_dir, "--subset", 8, "--epochs", 1, "--out", ckpt) == 0
    assert run("denoise", "--checkpoint", ckpt, "--dataset", image_dir / "test") == 1


def test_corrupt_checkpoint_exits_1(tmp_path, image_dir):
    bad = tmp_path / "bad.ckpt"
    bad.write_bytes(b"nope")
    assert run("eval", "--checkpoint", bad, "--dataset", image_dir) == 1
