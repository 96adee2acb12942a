"""Quaternion and real-valued layers: functional ops and stateful modules."""

from .accounting import LayerCost, count_params_and_mults, layer_cost
from .functional import (
    ConvConfig,
    LayerGradients,
    PoolRouting,
    QKernel,
    avgpool2d,
    avgpool2d_backward,
    effective_weight,
    kernel_grads,
    maxpool2d,
    maxpool2d_backward,
    qavgpool2d,
    qavgpool2d_backward,
    qconv2d_backward,
    qconv2d_forward,
    qconv_transpose2d_backward,
    qconv_transpose2d_forward,
    qdense_backward,
    qdense_forward,
    qmaxpool2d,
    qmaxpool2d_backward,
    qrelu,
    qrelu_backward,
    real_conv2d,
    real_conv2d_backward,
    real_conv_transpose2d,
    real_conv_transpose2d_backward,
    real_dense,
    real_dense_backward,
    real_relu,
    real_relu_backward,
    softmax_head,
    tanh_activation,
    tanh_backward,
)
from .modules import (
    LAYER_KINDS,
    AvgPool2D,
    Conv2D,
    ConvTranspose2D,
    Dense,
    Flatten,
    Layer,
    MaxPool2D,
    QConv2D,
    QConvTranspose2D,
    QDense,
    QFlatten,
    ReLU,
    Split,
    Tanh,
    Upsample2D,
)

__all__ = [
    "AvgPool2D",
    "Conv2D",
    "ConvConfig",
    "ConvTranspose2D",
    "Dense",
    "Flatten",
    "LAYER_KINDS",
    "Layer",
    "LayerCost",
    "LayerGradients",
    "MaxPool2D",
    "PoolRouting",
    "QConv2D",
    "QConvTranspose2D",
    "QDense",
    "QFlatten",
    "QKernel",
    "ReLU",
    "Split",
    "Tanh",
    "Upsample2D",
    "avgpool2d",
    "avgpool2d_backward",
    "count_params_and_mults",
    "effective_weight",
    "kernel_grads",
    "layer_cost",
    "maxpool2d",
    "maxpool2d_backward",
    "qavgpool2d",
    "qavgpool2d_backward",
    "qconv2d_backward",
    "qconv2d_forward",
    "qconv_transpose2d_backward",
    "qconv_transpose2d_forward",
    "qdense_backward",
    "qdense_forward",
    "qmaxpool2d",
    "qmaxpool2d_backward",
    "qrelu",
    "qrelu_backward",
    "real_conv2d",
    "real_conv2d_backward",
    "real_conv_transpose2d",
    "real_conv_transpose2d_backward",
    "real_dense",
    "real_dense_backward",
    "real_relu",
    "real_relu_backward",
    "softmax_head",
    "tanh_activation",
    "tanh_backward",
]
