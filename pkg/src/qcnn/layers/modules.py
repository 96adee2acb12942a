"""Stateful layer objects used by :class:`qcnn.network.Network`.

Layers declare ``param_shapes`` at construction and get arrays from
``allocate``.  Each layer caches what its backward pass needs during
``forward`` and fills ``self.grads`` (same keys as ``self.params``) in
``backward``.
Per-sample shapes follow the carrier convention used throughout the package:

====== ==================== ==============================
 ndim   carrier              example
====== ==================== ==============================
 4      quaternion map       (C, 3, H, W)
 3      real map             (C, H, W)
 2      quaternion vector    (N, 3)
 1      real vector          (D,)
====== ==================== ==============================
"""

import numpy as np

from . import _conv
from . import functional as F


def _conv_out(size, kernel, stride, padding):
    pads = _conv.resolve_padding(padding, size, kernel, stride)
    return _conv.output_size(size, kernel, stride, pads)


def _convt_out(size, kernel, stride, padding):
    if padding == "valid":
        return (size - 1) * stride + kernel
    return size * stride


class Layer:
    kind = "layer"
    quaternion = False

    def __init__(self, in_shape):
        self.in_shape = tuple(in_shape)
        self.param_shapes = {}
        self.params = {}
        self.grads = {}
        self.out_shape = self.in_shape

    def allocate(self, dtype=np.float32):
        self.params = {name: np.zeros(shape, dtype=dtype) for name, shape in self.param_shapes.items()}

    def forward(self, x):
        raise NotImplementedError

    def backward(self, grad_out):
        raise NotImplementedError

    def fans(self):
        """(fan_in, fan_out) used by normalized initialization."""
        return (0, 0)

    def param_roles(self):
        """Map parameter name -> 'scale' | 'angle' | 'weight' | 'bias'."""
        return {}

    def zero_grads(self):
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}


class _QuaternionConvBase(Layer):
    quaternion = True
    transposed = False

    def __init__(self, in_shape, filters, kernel=3, stride=1, padding="same"):
        super().__init__(in_shape)
        if len(self.in_shape) != 4 or self.in_shape[1] != 3:
            raise ValueError(f"{self.kind} needs a quaternion map input, got per-sample shape {self.in_shape}")
        c, _, h, w = self.in_shape
        self.cfg = F.ConvConfig(stride, padding)
        self.filters, self.kernel = filters, kernel
        self.param_shapes = {"s": (filters, c, kernel, kernel), "theta": (filters, c, kernel, kernel)}
        size = _convt_out if self.transposed else _conv_out
        self.out_shape = (filters, 3, size(h, kernel, stride, padding), size(w, kernel, stride, padding))

    @property
    def qkernel(self):
        return F.QKernel(self.params["s"], self.params["theta"])

    def fans(self):
        c = self.in_shape[0]
        return (c * self.kernel**2, self.filters * self.kernel**2)

    def param_roles(self):
        return {"s": "scale", "theta": "angle"}


class QConv2D(_QuaternionConvBase):
    kind = "qconv"

    def forward(self, x):
        self._x = x
        return F.qconv2d_forward(x, self.qkernel, self.cfg)

    def backward(self, grad_out):
        g = F.qconv2d_backward(self._x, self.qkernel, self.cfg, grad_out)
        self.grads = g.grad_params
        return g.grad_input


class QConvTranspose2D(_QuaternionConvBase):
    kind = "qconv_t"
    transposed = True

    def forward(self, x):
        self._x = x
        return F.qconv_transpose2d_forward(x, self.qkernel, self.cfg)

    def backward(self, grad_out):
        g = F.qconv_transpose2d_backward(self._x, self.qkernel, self.cfg, grad_out)
        self.grads = g.grad_params
        return g.grad_input


class QDense(Layer):
    kind = "qdense"
    quaternion = True

    def __init__(self, in_shape, units):
        super().__init__(in_shape)
        if len(self.in_shape) != 2 or self.in_shape[1] != 3:
            raise ValueError(f"qdense needs a quaternion vector input, got {self.in_shape}")
        self.units = units
        n = self.in_shape[0]
        self.param_shapes = {"s": (units, n), "theta": (units, n)}
        self.out_shape = (units, 3)

    def forward(self, x):
        self._x = x
        return F.qdense_forward(x, F.QKernel(self.params["s"], self.params["theta"]))

    def backward(self, grad_out):
        g = F.qdense_backward(self._x, F.QKernel(self.params["s"], self.params["theta"]), grad_out)
        self.grads = g.grad_params
        return g.grad_input

    def fans(self):
        return (self.in_shape[0], self.units)

    def param_roles(self):
        return {"s": "scale", "theta": "angle"}


class _RealConvBase(Layer):
    transposed = False

    def __init__(self, in_shape, filters, kernel=3, stride=1, padding="same", bias=False):
        super().__init__(in_shape)
        if len(self.in_shape) != 3:
            raise ValueError(f"{self.kind} needs a real feature map input, got {self.in_shape}")
        c, h, w = self.in_shape
        self.cfg = F.ConvConfig(stride, padding)
        self.filters, self.kernel = filters, kernel
        self.param_shapes = {"w": (filters, c, kernel, kernel)}
        if bias:
            self.param_shapes["b"] = (filters,)
        size = _convt_out if self.transposed else _conv_out
        self.out_shape = (filters, size(h, kernel, stride, padding), size(w, kernel, stride, padding))

    def fans(self):
        return (self.in_shape[0] * self.kernel**2, self.filters * self.kernel**2)

    def param_roles(self):
        return {"w": "weight", "b": "bias"}


class Conv2D(_RealConvBase):
    kind = "conv"

    def forward(self, x):
        self._x = x
        return F.real_conv2d(x, self.params["w"], self.cfg, self.params.get("b"))

    def backward(self, grad_out):
        g = F.real_conv2d_backward(self._x, self.params["w"], self.cfg, grad_out, self.params.get("b"))
        self.grads = g.grad_params
        return g.grad_input


class ConvTranspose2D(_RealConvBase):
    kind = "conv_t"
    transposed = True

    def forward(self, x):
        self._x = x
        return F.real_conv_transpose2d(x, self.params["w"], self.cfg, self.params.get("b"))

    def backward(self, grad_out):
        g = F.real_conv_transpose2d_backward(self._x, self.params["w"], self.cfg, grad_out, self.params.get("b"))
        self.grads = g.grad_params
        return g.grad_input


class Dense(Layer):
    kind = "dense"

    def __init__(self, in_shape, units, bias=False):
        super().__init__(in_shape)
        if len(self.in_shape) != 1:
            raise ValueError(f"dense needs a real vector input, got {self.in_shape}")
        self.units = units
        self.param_shapes = {"w": (units, self.in_shape[0])}
        if bias:
            self.param_shapes["b"] = (units,)
        self.out_shape = (units,)

    def forward(self, x):
        self._x = x
        return F.real_dense(x, self.params["w"], self.params.get("b"))

    def backward(self, grad_out):
        g = F.real_dense_backward(self._x, self.params["w"], grad_out, self.params.get("b"))
        self.grads = g.grad_params
        return g.grad_input

    def fans(self):
        return (self.in_shape[0], self.units)

    def param_roles(self):
        return {"w": "weight", "b": "bias"}


class _Pool(Layer):
    def __init__(self, in_shape, size=2):
        super().__init__(in_shape)
        self.size = size
        *lead, h, w = self.in_shape
        if len(self.in_shape) not in (3, 4):
            raise ValueError(f"{self.kind} needs a feature map input, got {self.in_shape}")
        if h % size or w % size:
            raise ValueError(f"{self.kind}: {h}x{w} is not divisible by window {size}")
        self.quaternion = len(self.in_shape) == 4
        self.out_shape = tuple(lead) + (h // size, w // size)

    def _real(self, x):
        # quaternion maps pool per imaginary part: fold the part axis into channels
        return x.reshape((x.shape[0], -1) + x.shape[-2:])


class MaxPool2D(_Pool):
    kind = "maxpool"

    def forward(self, x):
        out, self._idx = _conv.maxpool2d(self._real(x), self.size)
        self._shape = x.shape
        return out.reshape(x.shape[:-2] + out.shape[-2:])

    def backward(self, grad_out):
        g = _conv.maxpool2d_backward(self._real(grad_out), self._idx, self.size)
        return g.reshape(self._shape)


class AvgPool2D(_Pool):
    kind = "avgpool"

    def forward(self, x):
        self._shape = x.shape
        out = _conv.avgpool2d(self._real(x), self.size)
        return out.reshape(x.shape[:-2] + out.shape[-2:])

    def backward(self, grad_out):
        g = _conv.avgpool2d_backward(self._real(grad_out), self.size)
        return g.reshape(self._shape)


class Upsample2D(Layer):
    kind = "upsample"

    def __init__(self, in_shape, factor=2):
        super().__init__(in_shape)
        self.factor = factor
        *lead, h, w = self.in_shape
        self.out_shape = tuple(lead) + (h * factor, w * factor)

    def forward(self, x):
        return _conv.upsample2d(x, self.factor)

    def backward(self, grad_out):
        return _conv.upsample2d_backward(grad_out, self.factor)


class ReLU(Layer):
    """Elementwise ReLU; on quaternion carriers this clamps each imaginary part."""

    kind = "relu"

    def forward(self, x):
        self._x = x
        return np.maximum(x, 0)

    def backward(self, grad_out):
        return grad_out * (self._x > 0)


class Tanh(Layer):
    kind = "tanh"

    def forward(self, x):
        self._y = np.tanh(x)
        return self._y

    def backward(self, grad_out):
        return F.tanh_backward(self._y, grad_out)


class Split(Layer):
    """Quaternion map (C, 3, H, W) -> real map (3C, H, W), channel-major."""

    kind = "split"

    def __init__(self, in_shape):
        super().__init__(in_shape)
        c, p, h, w = self.in_shape
        self.out_shape = (3 * c, h, w)

    def forward(self, x):
        return x.reshape((x.shape[0],) + self.out_shape)

    def backward(self, grad_out):
        return grad_out.reshape((grad_out.shape[0],) + self.in_shape)


class QFlatten(Layer):
    """Quaternion map (C, 3, H, W) -> quaternion vector (C*H*W, 3)."""

    kind = "qflatten"

    def __init__(self, in_shape):
        super().__init__(in_shape)
        c, _, h, w = self.in_shape
        self.out_shape = (c * h * w, 3)

    def forward(self, x):
        return np.moveaxis(x, 2, -1).reshape((x.shape[0],) + self.out_shape)

    def backward(self, grad_out):
        c, _, h, w = self.in_shape
        g = grad_out.reshape(grad_out.shape[0], c, h, w, 3)
        return np.ascontiguousarray(np.moveaxis(g, -1, 2))


class Flatten(Layer):
    """Any carrier -> real vector.  Quaternion maps flatten in (c, h, w, part) order."""

    kind = "flatten"

    def __init__(self, in_shape):
        super().__init__(in_shape)
        self.out_shape = (int(np.prod(self.in_shape)),)

    def forward(self, x):
        if len(self.in_shape) == 4:
            x = np.moveaxis(x, 2, -1)
        return x.reshape(x.shape[0], -1)

    def backward(self, grad_out):
        if len(self.in_shape) == 4:
            c, _, h, w = self.in_shape
            g = grad_out.reshape(grad_out.shape[0], c, h, w, 3)
            return np.ascontiguousarray(np.moveaxis(g, -1, 2))
        return grad_out.reshape((grad_out.shape[0],) + self.in_shape)


LAYER_KINDS = {
    cls.kind: cls
    for cls in (
        QConv2D,
        QConvTranspose2D,
        QDense,
        Conv2D,
        ConvTranspose2D,
        Dense,
        MaxPool2D,
        AvgPool2D,
        Upsample2D,
        ReLU,
        Tanh,
        Split,
        QFlatten,
        Flatten,
    )
}
