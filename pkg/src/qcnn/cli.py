"""Command-line entry point: ``qcnn {train,eval,denoise,gradcheck,audit}``.

Exit codes: 0 success, 1 runtime failure, 2 usage error.  Any long option can
also come from a ``key = value`` file given with ``--config`` (``#`` starts a
comment, keys may use dashes or underscores); options on the command line win.
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import data, experiments, gradcheck, metrics
from .checkpoint import CheckpointError, load_checkpoint
from .experiments import RunConfig
from .network import Network
from .presets import PRESETS, build_preset

log = logging.getLogger("qcnn")

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _add_model_flags(p, with_training=True):
    p.add_argument("--preset", choices=sorted(PRESETS), default="shallow-cifar")
    p.add_argument("--quaternion", action="store_true", help="quaternion variant of the preset")
    p.add_argument("--filter-ratio", type=_positive_float, help="scale quaternion filter counts (e.g. 0.7071)")
    p.add_argument("--width", type=_positive_int, help="denoiser base filter count")
    p.add_argument("--precision", choices=["single", "double"], default="single")
    if with_training:
        p.add_argument("--dataset", help="CIFAR-10 batch directory/file, or image folder with train/ and test/")
        p.add_argument("--subset", type=_positive_int, help="use the first N training samples")
        p.add_argument("--test-subset", type=_positive_int, help="use the first N held-out samples")
        p.add_argument("--epochs", type=_positive_int)
        p.add_argument("--batch-size", type=_positive_int)
        p.add_argument("--optimizer", choices=["sgd", "rmsprop", "adam"])
        p.add_argument("--lr", type=_positive_float)
        p.add_argument("--decay", type=float, help="RMSProp learning-rate decay")
        p.add_argument("--augment", action=argparse.BooleanOptionalAction, help="shift/flip augmentation")
        p.add_argument("--eval-split", choices=["train", "test"], default="test")
        p.add_argument("--sp-ratio", type=float, default=0.30, help="salt-and-pepper pixel fraction")
        p.add_argument("--variance", type=float, default=0.01, help="Gaussian noise variance")
        p.add_argument("--stop-at", type=float, help="stop once the eval metric reaches this value")
        p.add_argument("--no-timing", action="store_true", help="write 0 for wall_secs so CSVs are reproducible")


def build_parser():
    parser = argparse.ArgumentParser(prog="qcnn", description="Quaternion CNNs for colour images.")
    parser.add_argument("-q", "--quiet", action="store_true", help="only log warnings")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("train", help="train a preset, write per-epoch CSV and checkpoint")
    _add_model_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="checkpoint path")
    p.add_argument("--csv", help="per-epoch metrics CSV path")

    p = sub.add_parser("eval", help="accuracy or PSNR of a checkpoint")
    p.add_argument("--checkpoint", help="checkpoint written by train")
    p.add_argument("--dataset")
    p.add_argument("--subset", type=_positive_int, help="evaluate the first N samples")
    p.add_argument("--eval-split", choices=["train", "test"], default="test")
    p.add_argument("--seed", type=int, default=0, help="noise seed for denoiser evaluation")
    p.add_argument("--sp-ratio", type=float, default=0.30)
    p.add_argument("--variance", type=float, default=0.01)

    p = sub.add_parser("denoise", help="restore images with a denoiser checkpoint")
    p.add_argument("--checkpoint", help="denoiser checkpoint")
    p.add_argument("--dataset", help="folder of PNG/PPM images")
    p.add_argument("--out", help="output folder for restored images")
    p.add_argument("--format", choices=["png", "ppm"], default="png")
    p.add_argument("--pre-corrupted", action="store_true", help="inputs are already noisy; do not corrupt")
    p.add_argument("--reference", help="folder of clean images matching --dataset names (for PSNR)")
    p.add_argument("--compare", help="second checkpoint of the other carrier; adds the paired analysis")
    p.add_argument("--csv", help="per-image CSV (paired analysis columns when --compare is given)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sp-ratio", type=float, default=0.30)
    p.add_argument("--variance", type=float, default=0.01)

    p = sub.add_parser("gradcheck", help="finite-difference check of every layer kind")
    p.add_argument("--seed", type=int, default=0, help="first of three consecutive seeds")
    p.add_argument("--tolerance", type=float, default=1e-4)

    p = sub.add_parser("audit", help="parameter and multiplication counts per layer")
    _add_model_flags(p, with_training=False)
    p.add_argument("--both", action="store_true", help="audit real and quaternion variants side by side")

    for sp in sub.choices.values():
        sp.add_argument("--config", help="key = value file of option defaults")
    parser.subcommands = sub.choices
    return parser


# -- config file -------------------------------------------------------------


def read_config(path):
    """Parse ``key = value`` lines; returns an ordered dict of raw strings."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _config_defaults(subparser, values, path):
    actions = {a.dest: a for a in subparser._actions if a.dest not in ("help", "config")}
    defaults = {}
    for key, text in values.items():
        action = actions.get(key)
        if action is None:
            subparser.error(f"{path}: unknown option {key!r}")
        if action.nargs == 0 or isinstance(action, argparse.BooleanOptionalAction):
            low = text.lower()
            if low not in _TRUE | _FALSE:
                subparser.error(f"{path}: {key} expects true/false, got {text!r}")
            defaults[key] = low in _TRUE
            continue
        try:
            value = action.type(text) if action.type else text
        except (argparse.ArgumentTypeError, ValueError) as exc:
            subparser.error(f"{path}: bad value for {key}: {exc}")
        if action.choices is not None and value not in action.choices:
            subparser.error(f"{path}: {key} must be one of {', '.join(map(str, action.choices))}")
        defaults[key] = value
    return defaults


def parse_args(argv):
    parser = build_parser()
    pre, _ = parser.parse_known_args(argv)
    if getattr(pre, "config", None):
        subparser = parser.subcommands[pre.command]
        try:
            values = read_config(pre.config)
        except (OSError, ValueError) as exc:
            subparser.error(str(exc))
        subparser.set_defaults(**_config_defaults(subparser, values, pre.config))
    args = parser.parse_args(argv)
    return parser, args


# -- commands ----------------------------------------------------------------


def _require(parser, args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        sub = parser.subcommands[args.command]
        sub.error("missing required option(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def cmd_train(args):
    cfg = RunConfig(
        preset=args.preset,
        dataset=args.dataset,
        subset=args.subset,
        test_subset=args.test_subset,
        epochs=args.epochs,
        batch_size=args.batch_size,
        optimizer=args.optimizer,
        lr=args.lr,
        decay=args.decay,
        seed=args.seed,
        precision=args.precision,
        quaternion=args.quaternion,
        filter_ratio=args.filter_ratio,
        width=args.width,
        augment=args.augment,
        eval_split=args.eval_split,
        sp_ratio=args.sp_ratio,
        variance=args.variance,
        timing=not args.no_timing,
        stop_at=args.stop_at,
        out=args.out,
        csv=args.csv,
    )
    _, _, records = experiments.train(cfg)
    last = records[-1]
    unit = "dB" if cfg.task == "denoise" else ""
    print(f"epoch {last.epoch}: train loss {last.train_loss:.6g}, eval {last.eval_metric:.6g} {unit}".rstrip())
    return 0


def _checkpoint_banner(path, net, manifest):
    log.info(
        "checkpoint %s network=%s precision=%s seed=%s params=%d optimizer=%s",
        path,
        manifest["network"].get("name", "?"),
        manifest["precision"],
        manifest.get("seed"),
        net.n_params,
        manifest.get("optimizer"),
    )


def cmd_eval(args):
    net, _, manifest = load_checkpoint(args.checkpoint)
    _checkpoint_banner(args.checkpoint, net, manifest)
    q = experiments.is_quaternion(net)
    if len(net.output_shape) == 1:
        ds = data.load_cifar10(args.dataset, args.eval_split, args.subset)
        acc = experiments.evaluate_accuracy(net, ds.images, ds.labels, q)
        print(f"accuracy {acc:.6g} on {len(ds)} {args.eval_split} images")
        return 0
    root = Path(args.dataset)
    folder = root / args.eval_split if (root / args.eval_split).is_dir() else root
    clean = data.load_image_folder(folder)[: args.subset]
    pairs = data.make_denoise_pairs(clean, np.random.default_rng(args.seed), args.sp_ratio, args.variance)
    restored = experiments.denoise_images(net, pairs.noisy)
    base = metrics.mean_psnr(pairs.noisy, pairs.clean)
    score = metrics.mean_psnr(restored, pairs.clean)
    print(f"psnr {score:.6g} dB (corrupted input {base:.6g} dB) on {len(clean)} images")
    return 0


def _image_names(folder):
    return sorted(p for p in Path(folder).iterdir() if p.suffix.lower() in (".png", ".ppm"))


def cmd_denoise(args):
    net, _, manifest = load_checkpoint(args.checkpoint)
    _checkpoint_banner(args.checkpoint, net, manifest)
    if len(net.output_shape) == 1:
        raise ValueError(f"{args.checkpoint} holds a classifier, not a denoiser")
    size = net.output_shape[-1]
    names = [p.stem for p in _image_names(args.dataset)]
    images = data.load_image_folder(args.dataset, size)
    if args.pre_corrupted:
        noisy = images
        clean = data.load_image_folder(args.reference, size) if args.reference else None
    else:
        clean = images
        rng = np.random.default_rng(args.seed)
        noisy = data.make_denoise_pairs(clean, rng, args.sp_ratio, args.variance).noisy
    if clean is not None and len(clean) != len(noisy):
        raise ValueError(f"{len(noisy)} inputs but {len(clean)} reference images")
    restored = experiments.denoise_images(net, noisy)
    other = None
    if args.compare:
        other_net, _, other_manifest = load_checkpoint(args.compare)
        _checkpoint_banner(args.compare, other_net, other_manifest)
        if experiments.is_quaternion(other_net) == experiments.is_quaternion(net):
            raise ValueError("--compare needs one real-valued and one quaternion checkpoint")
        if clean is None:
            raise ValueError("the paired analysis needs clean references (drop --pre-corrupted or pass --reference)")
        other = experiments.denoise_images(other_net, noisy)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, img in zip(names, restored):
            data.save_image(out / f"{name}.{args.format}", img)
        log.info("wrote %d restored images to %s", len(restored), out)
    if clean is None:
        print(f"restored {len(restored)} images (no references, PSNR not computed)")
        return 0
    if other is not None:
        quat_out, real_out = (restored, other) if experiments.is_quaternion(net) else (other, restored)
        rows = [metrics.paired_row(n, c, r, q) for n, c, r, q in zip(names, clean, real_out, quat_out)]
        if args.csv:
            metrics.write_paired_csv(rows, args.csv)
        for row in rows:
            print(f"{row[0]}: S {row[1]:.4f} A {row[2]:.4f} real {row[3]:.3f} dB quat {row[4]:.3f} dB D {row[5]:+.3f}")
        print(f"mean D {float(np.mean([r[5] for r in rows])):+.4f} dB over {len(rows)} images")
        return 0
    scores = [metrics.psnr(r, c) for r, c in zip(restored, clean)]
    inputs = [metrics.psnr(n, c) for n, c in zip(noisy, clean)]
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write("image_id,psnr_input,psnr_output\n")
            for name, a, b in zip(names, inputs, scores):
                fh.write(f"{name},{a:.6g},{b:.6g}\n")
    for name, a, b in zip(names, inputs, scores):
        print(f"{name}: input {a:.3f} dB -> output {b:.3f} dB")
    print(f"mean psnr {np.mean(scores):.4f} dB (input {np.mean(inputs):.4f} dB)")
    return 0


def cmd_gradcheck(args):
    reports = gradcheck.run_suite(seeds=(args.seed, args.seed + 1, args.seed + 2), tolerance=args.tolerance)
    for r in reports:
        print(r)
    failed = [r for r in reports if not r.passed]
    print(f"{len(reports) - len(failed)}/{len(reports)} checks passed")
    return 1 if failed else 0


def _audit_rows(net):
    rows = net.audit()
    print(f"{'layer':>5} {'kind':<9} {'params':>12} {'mults':>16}")
    for i, kind, params, mults in rows:
        print(f"{i:>5} {kind:<9} {params:>12d} {mults:>16d}")
    conv = sum(p for _, k, p, _ in rows if "conv" in k)
    total = sum(p for _, _, p, _ in rows)
    print(f"{'':>5} {'conv':<9} {conv:>12d}")
    print(f"{'':>5} {'total':<9} {total:>12d} {sum(m for *_, m in rows):>16d}")
    return conv, total


def cmd_audit(args):
    overrides = {"width": args.width} if args.width else {}
    variants = [False, True] if args.both else [args.quaternion]
    conv = {}
    for q in variants:
        spec = build_preset(args.preset, q, args.filter_ratio, **overrides)
        net = Network(spec, allocate=False)
        print(f"{spec.name} input {spec.input_shape} -> {net.output_shape}")
        conv[q], _ = _audit_rows(net)
    if args.both:
        print(f"quaternion/real conv parameter ratio {conv[True] / conv[False]:.6f}")
    return 0


COMMANDS = {"train": cmd_train, "eval": cmd_eval, "denoise": cmd_denoise, "gradcheck": cmd_gradcheck, "audit": cmd_audit}
REQUIRED = {"train": ("dataset",), "eval": ("checkpoint", "dataset"), "denoise": ("checkpoint", "dataset")}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser, args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO, format="%(asctime)s %(message)s", stream=sys.stderr, force=True
    )
    try:
        _require(parser, args, *REQUIRED.get(args.command, ()))
    except SystemExit as exc:
        return int(exc.code)
    try:
        return COMMANDS[args.command](args)
    except (OSError, ValueError, CheckpointError, MemoryError) as exc:
        log.error("error: %s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
