"""Real-valued 2D convolution and pooling kernels on (N, C, H, W) arrays.

Convolution is cross-correlation.  Padding is passed explicitly as
``((top, bottom), (left, right))``.

Stride-1 convolutions use a flat-shift scheme: each padded channel is viewed
as one flat row of length Hp*Wp, and kernel tap (i, j) becomes a contiguous
slice starting at i*Wp + j.  Every tap is then a single batched matmul with
no patch copies; output columns that wrap across a row boundary are computed
and discarded.  Strided convolutions fall back to im2col, with patches
recomputed in the backward pass rather than cached.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def resolve_padding(padding, size, kernel, stride):
    """Per-axis (lo, hi) zero padding for 'valid' or 'same'."""
    if padding == "valid":
        return (0, 0)
    if padding == "same":
        out = -(-size // stride)
        total = max((out - 1) * stride + kernel - size, 0)
        return (total // 2, total - total // 2)
    raise ValueError(f"unknown padding {padding!r}; expected 'valid' or 'same'")


def output_size(size, kernel, stride, pads):
    span = size + pads[0] + pads[1] - kernel
    if span < 0:
        raise ValueError(f"kernel of size {kernel} is larger than padded input {size + sum(pads)}")
    return span // stride + 1


def _pad(x, pads):
    (t, b), (l, r) = pads
    if t == b == l == r == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (t, b), (l, r)))


def _im2col(xp, kh, kw, stride):
    win = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    n, c, ho, wo = win.shape[:4]
    cols = win.transpose(0, 2, 3, 1, 4, 5).reshape(n * ho * wo, c * kh * kw)
    return cols, ho, wo


def _flat_geometry(xp, kh, kw):
    n, c, hp, wp = xp.shape
    ho, wo = hp - kh + 1, wp - kw + 1
    # last flat output row is short: positions past wo would read off the end
    m = ho * wp - (kw - 1)
    return ho, wo, wp, m


def _conv2d_flat(xp, w):
    n, c = xp.shape[:2]
    k, _, kh, kw = w.shape
    ho, wo, wp, m = _flat_geometry(xp, kh, kw)
    xf = xp.reshape(n, c, -1)
    taps = np.ascontiguousarray(w.transpose(2, 3, 0, 1))  # unit-stride (K, C) per tap keeps matmul on BLAS
    out = np.zeros((n, k, ho * wp), dtype=np.result_type(xp, w))
    acc = out[:, :, :m]
    tmp = np.empty((n, k, m), dtype=out.dtype)
    for i in range(kh):
        for j in range(kw):
            off = i * wp + j
            np.matmul(taps[i, j], xf[:, :, off : off + m], out=tmp)
            acc += tmp
    return np.ascontiguousarray(out.reshape(n, k, ho, wp)[..., :wo])


def _conv2d_flat_backward(xp, w, grad_out):
    n, c = xp.shape[:2]
    k, _, kh, kw = w.shape
    ho, wo, wp, m = _flat_geometry(xp, kh, kw)
    xf = xp.reshape(n, c, -1)
    taps_t = np.ascontiguousarray(w.transpose(2, 3, 1, 0))
    gp = np.zeros((n, k, ho, wp), dtype=grad_out.dtype)
    gp[..., :wo] = grad_out
    gf = gp.reshape(n, k, -1)[:, :, :m]
    dw = np.empty(w.shape, dtype=np.result_type(xp, grad_out))
    dxf = np.zeros(xf.shape, dtype=np.result_type(w, grad_out))
    tmp = np.empty((n, c, m), dtype=dxf.dtype)
    for i in range(kh):
        for j in range(kw):
            off = i * wp + j
            xs = xf[:, :, off : off + m]
            dw[:, :, i, j] = np.matmul(gf, xs.transpose(0, 2, 1)).sum(axis=0)
            np.matmul(taps_t[i, j], gf, out=tmp)
            dxf[:, :, off : off + m] += tmp
    return dxf.reshape(xp.shape), dw


def _check_shapes(x, w, stride, pads):
    k, c, kh, kw = w.shape
    if x.shape[1] != c:
        raise ValueError(f"input has {x.shape[1]} channels, kernel expects {c}")
    ho = output_size(x.shape[2], kh, stride, pads[0])
    wo = output_size(x.shape[3], kw, stride, pads[1])
    return ho, wo


def _unpad(xp, pads):
    (t, b), (l, r) = pads
    return np.ascontiguousarray(xp[:, :, t : xp.shape[2] - b, l : xp.shape[3] - r])


def conv2d(x, w, stride=1, pads=((0, 0), (0, 0))):
    """x: (N, C, H, W), w: (K, C, kh, kw) -> (N, K, Ho, Wo)."""
    n = x.shape[0]
    k = w.shape[0]
    _check_shapes(x, w, stride, pads)
    xp = _pad(x, pads)
    if stride == 1:
        return _conv2d_flat(np.ascontiguousarray(xp), w)
    cols, ho, wo = _im2col(xp, w.shape[2], w.shape[3], stride)
    out = cols @ w.reshape(k, -1).T
    return np.ascontiguousarray(out.reshape(n, ho, wo, k).transpose(0, 3, 1, 2))


def conv2d_backward(x, w, grad_out, stride=1, pads=((0, 0), (0, 0))):
    """Gradients of ``conv2d`` w.r.t. its input and its weight."""
    n = x.shape[0]
    k, c, kh, kw = w.shape
    ho, wo = _check_shapes(x, w, stride, pads)
    if grad_out.shape != (n, k, ho, wo):
        raise ValueError(f"grad_out has shape {grad_out.shape}, expected {(n, k, ho, wo)}")
    xp = np.ascontiguousarray(_pad(x, pads))
    if stride == 1:
        dxp, dw = _conv2d_flat_backward(xp, w, grad_out)
        return _unpad(dxp, pads), dw
    cols, _, _ = _im2col(xp, kh, kw, stride)
    g2 = grad_out.transpose(0, 2, 3, 1).reshape(n * ho * wo, k)
    dw = (g2.T @ cols).reshape(w.shape)
    del cols
    dcols = (g2 @ w.reshape(k, -1)).reshape(n, ho, wo, c, kh, kw)
    dxp = np.zeros_like(xp)
    hspan = stride * (ho - 1) + 1
    wspan = stride * (wo - 1) + 1
    for i in range(kh):
        for j in range(kw):
            dxp[:, :, i : i + hspan : stride, j : j + wspan : stride] += dcols[..., i, j].transpose(0, 3, 1, 2)
    return _unpad(dxp, pads), dw


def zero_insert(x, stride):
    """Insert ``stride - 1`` zeros between neighbouring pixels."""
    if stride == 1:
        return x
    n, c, h, w = x.shape
    out = np.zeros((n, c, (h - 1) * stride + 1, (w - 1) * stride + 1), dtype=x.dtype)
    out[:, :, ::stride, ::stride] = x
    return out


def transpose_padding(padding, kernel, stride):
    """Padding applied to the zero-inserted input of a transposed convolution.

    Chosen so the transposed convolution is the adjoint of the forward
    convolution with the same ``padding`` setting: 'valid' maps H to
    (H - 1) * stride + kernel, 'same' maps H to H * stride.
    """
    if padding == "valid":
        return (kernel - 1, kernel - 1)
    if padding == "same":
        if kernel < stride:
            raise ValueError("'same' transposed convolution needs kernel >= stride")
        lo = kernel - 1 - (kernel - stride) // 2
        return (lo, stride + kernel - 2 - lo)
    raise ValueError(f"unknown padding {padding!r}; expected 'valid' or 'same'")


def _windows(x, size):
    n, c, h, w = x.shape
    if h % size or w % size:
        raise ValueError(f"spatial size {h}x{w} is not divisible by pooling window {size}")
    v = x.reshape(n, c, h // size, size, w // size, size).transpose(0, 1, 2, 4, 3, 5)
    return v.reshape(n, c, h // size, w // size, size * size)


def maxpool2d(x, size=2):
    """Non-overlapping max pooling; returns (output, argmax index per window).

    Ties resolve to the first element in row-major window order.
    """
    win = _windows(x, size)
    idx = np.argmax(win, axis=-1)
    out = np.take_along_axis(win, idx[..., None], axis=-1)[..., 0]
    return out, idx


def maxpool2d_backward(grad_out, idx, size=2):
    n, c, ho, wo = grad_out.shape
    g = np.zeros((n, c, ho, wo, size * size), dtype=grad_out.dtype)
    np.put_along_axis(g, idx[..., None], grad_out[..., None], axis=-1)
    g = g.reshape(n, c, ho, wo, size, size).transpose(0, 1, 2, 4, 3, 5)
    return g.reshape(n, c, ho * size, wo * size)


def avgpool2d(x, size=2):
    return _windows(x, size).mean(axis=-1)


def avgpool2d_backward(grad_out, size=2):
    g = grad_out / (size * size)
    return np.repeat(np.repeat(g, size, axis=2), size, axis=3)


def upsample2d(x, factor=2):
    """Nearest-neighbour upsampling on the last two axes."""
    return np.repeat(np.repeat(x, factor, axis=-2), factor, axis=-1)


def upsample2d_backward(grad_out, factor=2):
    *lead, h, w = grad_out.shape
    g = grad_out.reshape(*lead, h // factor, factor, w // factor, factor)
    return g.sum(axis=(-3, -1))
