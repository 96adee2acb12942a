"""Ready-made network topologies.

Every preset has a real-valued and a quaternion variant with identical
topology; they differ only in layer kinds and, through ``filter_ratio``, in
the quaternion filter counts.  Quaternion variants take a single quaternion
input channel (the pure-quaternion colour image) where the real ones take
three colour channels.
"""

import math

from .network import LayerSpec, NetworkSpec

INV_SQRT2 = 1 / math.sqrt(2)


def scaled(width, ratio):
    return max(1, round(width * ratio))


def _kinds(quaternion):
    if quaternion:
        return "qconv", "qconv_t", "qdense"
    return "conv", "conv_t", "dense"


def _input(quaternion, size):
    return (1, 3, size, size) if quaternion else (3, size, size)


def preset_shallow_cifar(quaternion=False, filter_ratio=1.0, widths=(32, 32, 64, 64), hidden=512, classes=10, size=32):
    """Two blocks of two 3x3 convolutions and a 2x2 max-pool, then two dense layers.

    The quaternion variant keeps the hidden dense layer quaternion-valued and
    flattens its output into a real vector for the final softmax layer.
    ``filter_ratio`` scales quaternion conv widths and hidden units.
    """
    ratio = filter_ratio if quaternion else 1.0
    conv, _, dense = _kinds(quaternion)
    w = [scaled(v, ratio) for v in widths]
    layers = []
    for block in (w[:2], w[2:]):
        for f in block:
            layers.append(LayerSpec(conv, {"filters": f, "kernel": 3, "padding": "same"}, "relu"))
        layers.append(LayerSpec("maxpool"))
    layers += [
        LayerSpec("qflatten" if quaternion else "flatten"),
        LayerSpec(dense, {"units": scaled(hidden, ratio)}, "relu"),
        LayerSpec("flatten"),
        LayerSpec("dense", {"units": classes}),
    ]
    name = "shallow-cifar" + ("-q" if quaternion else "")
    return NetworkSpec(_input(quaternion, size), layers, name)


def preset_denoiser(quaternion=False, filter_ratio=INV_SQRT2, width=32, size=128):
    """Encoder-decoder denoiser with additive skips at matching resolutions.

    Encoder: two 3x3 convs, 2x2 average pool, two convs, average pool, two
    convs and a 1x1 convolution acting as a per-pixel fully-connected layer.
    The decoder mirrors it with transposed convolutions and nearest
    up-sampling; each up-sampled map is added to the last map before the
    matching pool.  The top layer uses tanh.
    """
    ratio = filter_ratio if quaternion else 1.0
    conv, conv_t, _ = _kinds(quaternion)
    f = scaled(width, ratio)
    out_filters = 1 if quaternion else 3
    c3 = {"filters": f, "kernel": 3, "padding": "same"}
    layers = [
        LayerSpec(conv, c3, "relu"),  # 0
        LayerSpec(conv, c3, "relu"),  # 1  -> skip into 14
        LayerSpec("avgpool"),  # 2
        LayerSpec(conv, c3, "relu"),  # 3
        LayerSpec(conv, c3, "relu"),  # 4  -> skip into 11
        LayerSpec("avgpool"),  # 5
        LayerSpec(conv, c3, "relu"),  # 6
        LayerSpec(conv, c3, "relu"),  # 7
        LayerSpec(conv, {"filters": f, "kernel": 1, "padding": "same"}, "relu"),  # 8
        LayerSpec(conv_t, c3, "relu"),  # 9
        LayerSpec(conv_t, c3, "relu"),  # 10
        LayerSpec("upsample", {}, None, 4),  # 11
        LayerSpec(conv_t, c3, "relu"),  # 12
        LayerSpec(conv_t, c3, "relu"),  # 13
        LayerSpec("upsample", {}, None, 1),  # 14
        LayerSpec(conv_t, c3, "relu"),  # 15
        LayerSpec(conv_t, {"filters": out_filters, "kernel": 3, "padding": "same"}, "tanh"),  # 16
    ]
    name = "denoiser" + ("-q" if quaternion else "")
    return NetworkSpec(_input(quaternion, size), layers, name)


def preset_vgg_s(quaternion=False, filter_ratio=INV_SQRT2, classes=102, size=224):
    """VGG-S: five convolutions, three max-pools and three dense layers.

    Meant for auditing and shape checks; training it is far outside desk scale.
    """
    ratio = filter_ratio if quaternion else 1.0
    conv, _, dense = _kinds(quaternion)

    def c(filters, kernel, stride=1):
        return LayerSpec(conv, {"filters": scaled(filters, ratio), "kernel": kernel, "stride": stride, "padding": "same"}, "relu")

    layers = [
        c(96, 7, 2),
        LayerSpec("maxpool"),
        c(256, 5),
        LayerSpec("maxpool"),
        c(512, 3),
        c(512, 3),
        c(512, 3),
        LayerSpec("maxpool"),
        LayerSpec("qflatten" if quaternion else "flatten"),
        LayerSpec(dense, {"units": scaled(4096, ratio)}, "relu"),
        LayerSpec(dense, {"units": scaled(4096, ratio)}, "relu"),
        LayerSpec("flatten"),
        LayerSpec("dense", {"units": classes}),
    ]
    name = "vgg-s" + ("-q" if quaternion else "")
    return NetworkSpec(_input(quaternion, size), layers, name)


PRESETS = {
    "shallow-cifar": preset_shallow_cifar,
    "denoiser": preset_denoiser,
    "vgg-s": preset_vgg_s,
}

# task each preset trains for
PRESET_TASK = {"shallow-cifar": "classify", "denoiser": "denoise", "vgg-s": "classify"}


def build_preset(name, quaternion=False, filter_ratio=None, **overrides):
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    kwargs = dict(overrides)
    if filter_ratio is not None:
        kwargs["filter_ratio"] = filter_ratio
    return PRESETS[name](quaternion=quaternion, **kwargs)
