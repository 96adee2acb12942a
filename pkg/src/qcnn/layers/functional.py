"""Forward and backward passes for quaternion and real-valued layers.

Quaternion feature maps are ``(N, C, 3, H, W)`` (an unbatched ``(C, 3, H, W)``
map is also accepted by the conv and dense entry points).  A quaternion
convolution with kernel ``(s, theta)`` of shape ``(K, C, L, L)`` is evaluated
as a real convolution over ``3C -> 3K`` channels whose 3x3 channel blocks are
``s * M(theta)``; parameter gradients are chained back from the gradient of
that effective weight.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .. import quat
from . import _conv


class QKernel(NamedTuple):
    """Quaternion kernel: per-tap scale ``s`` and rotation angle ``theta``."""

    s: np.ndarray
    theta: np.ndarray

    @property
    def shape(self):
        return self.s.shape


@dataclass(frozen=True)
class ConvConfig:
    stride: int = 1
    padding: str = "valid"

    def __post_init__(self):
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        if self.padding not in ("valid", "same"):
            raise ValueError(f"padding must be 'valid' or 'same', got {self.padding!r}")


class LayerGradients(NamedTuple):
    grad_input: np.ndarray
    grad_params: dict


def _check_kernel(k):
    if k.s.shape != k.theta.shape:
        raise ValueError(f"s has shape {k.s.shape} but theta has shape {k.theta.shape}")


def _batched(x, ndim):
    x = np.asarray(x)
    if x.ndim == ndim - 1:
        return x[None], True
    if x.ndim != ndim:
        raise ValueError(f"expected a {ndim - 1}-d or {ndim}-d array, got shape {x.shape}")
    return x, False


def _pads(cfg, h, w, kh, kw):
    return (
        _conv.resolve_padding(cfg.padding, h, kh, cfg.stride),
        _conv.resolve_padding(cfg.padding, w, kw, cfg.stride),
    )


# -- quaternion <-> effective real weights ----------------------------------


def effective_weight(k):
    """Real weight of shape (3K, 3C, ...) equivalent to quaternion kernel ``k``.

    Output channel ``3k + p`` receives ``s * M(theta)[p, q]`` times input
    channel ``3c + q``.
    """
    _check_kernel(k)
    m = quat.rotation_matrix(k.theta) * k.s[..., None, None]
    kk, cc = k.s.shape[:2]
    spatial = k.s.shape[2:]
    nsp = len(spatial)
    # (K, C, *sp, p, q) -> (K, p, C, q, *sp)
    order = (0, 2 + nsp, 1, 3 + nsp) + tuple(range(2, 2 + nsp))
    return m.transpose(order).reshape((3 * kk, 3 * cc) + spatial)


def kernel_grads(k, grad_weight):
    """Chain a gradient w.r.t. the effective weight back to (s, theta)."""
    kk, cc = k.s.shape[:2]
    spatial = k.s.shape[2:]
    nsp = len(spatial)
    g = grad_weight.reshape((kk, 3, cc, 3) + spatial)
    g = g.transpose((0, 2) + tuple(range(4, 4 + nsp)) + (1, 3))
    m = quat.rotation_matrix(k.theta)
    dm = quat.rotation_matrix_deriv(k.theta)
    ds = np.sum(g * m, axis=(-2, -1))
    dtheta = k.s * np.sum(g * dm, axis=(-2, -1))
    return {"s": ds, "theta": dtheta}


# -- quaternion convolution --------------------------------------------------


def qconv2d_forward(x, k, cfg=ConvConfig()):
    """Quaternion convolution of maps ``(N, C, 3, H, W)`` with kernel ``(K, C, L, L)``."""
    x, single = _batched(x, 5)
    _check_kernel(k)
    n, c, parts, h, w = x.shape
    kk, kc, kh, kw = k.s.shape
    if parts != 3:
        raise ValueError(f"quaternion maps need 3 imaginary parts, got {parts}")
    if kc != c:
        raise ValueError(f"input has {c} quaternion channels, kernel expects {kc}")
    pads = _pads(cfg, h, w, kh, kw)
    out = _conv.conv2d(x.reshape(n, 3 * c, h, w), effective_weight(k), cfg.stride, pads)
    out = out.reshape(n, kk, 3, out.shape[-2], out.shape[-1])
    return out[0] if single else out


def qconv2d_backward(x, k, cfg, grad_out):
    x, single = _batched(x, 5)
    grad_out, _ = _batched(grad_out, 5)
    n, c, _, h, w = x.shape
    kk, _, kh, kw = k.s.shape
    pads = _pads(cfg, h, w, kh, kw)
    weff = effective_weight(k)
    go = grad_out.reshape(n, 3 * kk, grad_out.shape[-2], grad_out.shape[-1])
    dx, dw = _conv.conv2d_backward(x.reshape(n, 3 * c, h, w), weff, go, cfg.stride, pads)
    dx = dx.reshape(x.shape)
    return LayerGradients(dx[0] if single else dx, kernel_grads(k, dw))


def _flip(k):
    return QKernel(k.s[..., ::-1, ::-1], k.theta[..., ::-1, ::-1])


def _transpose_pads(cfg, k):
    kh, kw = k.s.shape[-2:]
    return (
        _conv.transpose_padding(cfg.padding, kh, cfg.stride),
        _conv.transpose_padding(cfg.padding, kw, cfg.stride),
    )


def qconv_transpose2d_forward(x, k, cfg=ConvConfig()):
    """Transposed quaternion convolution: zero insertion, padding, then qconv2d.

    Kernel ``(K, C, L, L)`` maps C input channels to K output channels and is
    applied spatially flipped, so that this is the adjoint of ``qconv2d`` with
    kernel ``(s, -theta)`` after swapping its first two axes.
    """
    x, single = _batched(x, 5)
    _check_kernel(k)
    n, c, _, h, w = x.shape
    if k.s.shape[1] != c:
        raise ValueError(f"input has {c} quaternion channels, kernel expects {k.s.shape[1]}")
    up = _conv.zero_insert(x.reshape(n, 3 * c, h, w), cfg.stride)
    pads = _transpose_pads(cfg, k)
    out = _conv.conv2d(up, effective_weight(_flip(k)), 1, pads)
    out = out.reshape(n, k.s.shape[0], 3, out.shape[-2], out.shape[-1])
    return out[0] if single else out


def qconv_transpose2d_backward(x, k, cfg, grad_out):
    x, single = _batched(x, 5)
    grad_out, _ = _batched(grad_out, 5)
    n, c, _, h, w = x.shape
    kk = k.s.shape[0]
    up = _conv.zero_insert(x.reshape(n, 3 * c, h, w), cfg.stride)
    fk = _flip(k)
    go = grad_out.reshape(n, 3 * kk, grad_out.shape[-2], grad_out.shape[-1])
    dup, dw = _conv.conv2d_backward(up, effective_weight(fk), go, 1, _transpose_pads(cfg, k))
    dx = dup[:, :, :: cfg.stride, :: cfg.stride].reshape(x.shape)
    g = kernel_grads(fk, dw)
    grads = {name: arr[..., ::-1, ::-1].copy() for name, arr in g.items()}
    return LayerGradients(dx[0] if single else dx, grads)


# -- quaternion dense --------------------------------------------------------


def _parts(x):
    # (B, N, 3) -> three contiguous (B, N) part planes
    return [np.ascontiguousarray(x[..., p]) for p in range(3)]


def qdense_forward(x, k):
    """Quaternion fully connected layer: (B, N, 3) with kernel (M, N) -> (B, M, 3).

    Uses the circulant structure directly: with ``A_j = s * f_j``, output part
    ``p`` is ``sum_j x_{(p+j) mod 3} @ A_j.T``.
    """
    x, single = _batched(x, 3)
    _check_kernel(k)
    b, nin, parts = x.shape
    if parts != 3 or k.s.shape[1] != nin:
        raise ValueError(f"input of shape {x.shape[1:]} does not match kernel {k.s.shape}")
    a = [k.s * f for f in quat.rotation_coeffs(k.theta)]
    xs = _parts(x)
    out = np.empty((b, k.s.shape[0], 3), dtype=np.result_type(x, k.s))
    for p in range(3):
        out[..., p] = sum(xs[(p + j) % 3] @ a[j].T for j in range(3))
    return out[0] if single else out


def qdense_backward(x, k, grad_out):
    x, single = _batched(x, 3)
    grad_out, _ = _batched(grad_out, 3)
    f = quat.rotation_coeffs(k.theta)
    df = quat.rotation_coeffs_deriv(k.theta)
    a = [k.s * fj for fj in f]
    xs = _parts(x)
    gs = _parts(grad_out)
    dx = np.empty(x.shape, dtype=np.result_type(grad_out, k.s))
    for q in range(3):
        dx[..., q] = sum(gs[(q - j) % 3] @ a[j] for j in range(3))
    ds = np.zeros_like(k.s)
    dtheta = np.zeros_like(k.s)
    for j in range(3):
        da = sum(gs[p].T @ xs[(p + j) % 3] for p in range(3))
        ds += da * f[j]
        dtheta += da * df[j]
    dtheta *= k.s
    return LayerGradients(dx[0] if single else dx, {"s": ds, "theta": dtheta})


# -- quaternion pooling and activations ---------------------------------------


def _as_real(x):
    n, c, p, h, w = x.shape
    return x.reshape(n, c * p, h, w)


@dataclass
class PoolRouting:
    """Per-part argmax positions recorded by ``qmaxpool2d``."""

    index: np.ndarray
    size: int
    input_shape: tuple = field(default=())


def qmaxpool2d(x, size=2):
    """Per-part max pooling; the parts of one output may come from different sites."""
    x, single = _batched(x, 5)
    out, idx = _conv.maxpool2d(_as_real(x), size)
    out = out.reshape(x.shape[:3] + out.shape[-2:])
    routing = PoolRouting(idx, size, x.shape)
    return (out[0] if single else out), routing


def qmaxpool2d_backward(grad_out, routing):
    grad_out, single = _batched(grad_out, 5)
    g = _conv.maxpool2d_backward(_as_real(grad_out), routing.index, routing.size)
    g = g.reshape(routing.input_shape)
    return g[0] if single else g


def qavgpool2d(x, size=2):
    x, single = _batched(x, 5)
    out = _conv.avgpool2d(_as_real(x), size)
    out = out.reshape(x.shape[:3] + out.shape[-2:])
    return out[0] if single else out


def qavgpool2d_backward(grad_out, size=2):
    grad_out, single = _batched(grad_out, 5)
    g = _conv.avgpool2d_backward(_as_real(grad_out), size)
    g = g.reshape(grad_out.shape[:3] + g.shape[-2:])
    return g[0] if single else g


def qrelu(x):
    """Clamp each imaginary part at zero (nearest point of the nonnegative orthant)."""
    return np.maximum(x, 0)


def qrelu_backward(x, grad_out):
    return grad_out * (x > 0)


# -- real-valued baselines ---------------------------------------------------


def real_conv2d(x, w, cfg=ConvConfig(), bias=None):
    """Real convolution of (N, C, H, W) with weight (K, C, L, L)."""
    x, single = _batched(x, 4)
    pads = _pads(cfg, x.shape[2], x.shape[3], *w.shape[2:])
    out = _conv.conv2d(x, w, cfg.stride, pads)
    if bias is not None:
        out += bias[:, None, None]
    return out[0] if single else out


def real_conv2d_backward(x, w, cfg, grad_out, bias=None):
    x, single = _batched(x, 4)
    grad_out, _ = _batched(grad_out, 4)
    pads = _pads(cfg, x.shape[2], x.shape[3], *w.shape[2:])
    dx, dw = _conv.conv2d_backward(x, w, grad_out, cfg.stride, pads)
    grads = {"w": dw}
    if bias is not None:
        grads["b"] = grad_out.sum(axis=(0, 2, 3))
    return LayerGradients(dx[0] if single else dx, grads)


def real_conv_transpose2d(x, w, cfg=ConvConfig(), bias=None):
    """Real transposed convolution; weight (K, C, L, L) maps C -> K channels."""
    x, single = _batched(x, 4)
    kh, kw = w.shape[2:]
    pads = (
        _conv.transpose_padding(cfg.padding, kh, cfg.stride),
        _conv.transpose_padding(cfg.padding, kw, cfg.stride),
    )
    out = _conv.conv2d(_conv.zero_insert(x, cfg.stride), w[..., ::-1, ::-1], 1, pads)
    if bias is not None:
        out += bias[:, None, None]
    return out[0] if single else out


def real_conv_transpose2d_backward(x, w, cfg, grad_out, bias=None):
    x, single = _batched(x, 4)
    grad_out, _ = _batched(grad_out, 4)
    kh, kw = w.shape[2:]
    pads = (
        _conv.transpose_padding(cfg.padding, kh, cfg.stride),
        _conv.transpose_padding(cfg.padding, kw, cfg.stride),
    )
    up = _conv.zero_insert(x, cfg.stride)
    dup, dw = _conv.conv2d_backward(up, w[..., ::-1, ::-1], grad_out, 1, pads)
    dx = np.ascontiguousarray(dup[:, :, :: cfg.stride, :: cfg.stride])
    grads = {"w": dw[..., ::-1, ::-1].copy()}
    if bias is not None:
        grads["b"] = grad_out.sum(axis=(0, 2, 3))
    return LayerGradients(dx[0] if single else dx, grads)


def real_dense(x, w, bias=None):
    """(B, N) @ weight (M, N).T -> (B, M)."""
    out = x @ w.T
    if bias is not None:
        out = out + bias
    return out


def real_dense_backward(x, w, grad_out, bias=None):
    x2 = x.reshape(-1, x.shape[-1])
    g2 = grad_out.reshape(-1, grad_out.shape[-1])
    grads = {"w": g2.T @ x2}
    if bias is not None:
        grads["b"] = g2.sum(axis=0)
    return LayerGradients(grad_out @ w, grads)


real_relu = qrelu
real_relu_backward = qrelu_backward


def maxpool2d(x, size=2):
    return _conv.maxpool2d(x, size)


def maxpool2d_backward(grad_out, index, size=2):
    return _conv.maxpool2d_backward(grad_out, index, size)


def avgpool2d(x, size=2):
    return _conv.avgpool2d(x, size)


def avgpool2d_backward(grad_out, size=2):
    return _conv.avgpool2d_backward(grad_out, size)


def tanh_activation(x):
    return np.tanh(x)


def tanh_backward(y, grad_out):
    """Backward from the cached *output* ``y = tanh(x)``."""
    return grad_out * (1 - y * y)


def softmax_head(logits):
    """Softmax along the last axis, shifted by the max for stability."""
    logits = np.asarray(logits)
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)
