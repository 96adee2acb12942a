"""Parameter and multiplication counts for convolution and dense layers."""

from typing import NamedTuple


class LayerCost(NamedTuple):
    params: int
    mults: int


def count_params_and_mults(kind, n, *, filters=0, channels=0, kernel=1, units=0, inputs=0):
    """Cost of one layer on an ``n x n`` input.

    * ``qconv``: 2*K*C*L^2 parameters, 9*L^2*N^2*K*C multiplications
    * ``conv``: K*C*L^2 parameters, L^2*N^2*K*C multiplications
    * ``qdense``: 2*M*N parameters, 9*M*N multiplications
    * ``dense``: M*N parameters and multiplications

    Transposed convolutions are counted like their forward counterparts.
    Parameter-free layers cost nothing.
    """
    k, c, l = filters, channels, kernel
    if kind in ("qconv", "qconv_t"):
        return LayerCost(2 * k * c * l * l, 9 * l * l * n * n * k * c)
    if kind in ("conv", "conv_t"):
        return LayerCost(k * c * l * l, l * l * n * n * k * c)
    if kind == "qdense":
        return LayerCost(2 * units * inputs, 9 * units * inputs)
    if kind == "dense":
        return LayerCost(units * inputs, units * inputs)
    return LayerCost(0, 0)


def layer_cost(layer):
    """Cost of a built layer from :mod:`qcnn.layers.modules` (bias excluded)."""
    kind = layer.kind
    if kind in ("qconv", "qconv_t", "conv", "conv_t"):
        return count_params_and_mults(
            kind, layer.in_shape[-1], filters=layer.filters, channels=layer.in_shape[0], kernel=layer.kernel
        )
    if kind in ("qdense", "dense"):
        return count_params_and_mults(kind, 0, units=layer.units, inputs=layer.in_shape[0])
    return LayerCost(0, 0)
