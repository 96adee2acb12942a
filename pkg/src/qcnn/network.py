"""Network topology description and a sequential executor with additive skips."""

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .layers.accounting import layer_cost
from .layers.modules import LAYER_KINDS, ReLU, Tanh

_ALIASES = {"qmaxpool": "maxpool", "qavgpool": "avgpool", "qrelu": "relu", "qtanh": "tanh", "qupsample": "upsample"}
_ACTIVATIONS = {"relu": ReLU, "tanh": Tanh}


@dataclass
class LayerSpec:
    """One layer: ``activation(layer(x) + output[skip])``."""

    kind: str
    args: dict = field(default_factory=dict)
    activation: Optional[str] = None
    skip: Optional[int] = None


@dataclass
class NetworkSpec:
    input_shape: tuple
    layers: list
    name: str = ""

    def to_dict(self):
        return {"name": self.name, "input_shape": list(self.input_shape), "layers": [asdict(l) for l in self.layers]}

    @classmethod
    def from_dict(cls, d):
        layers = [LayerSpec(l["kind"], dict(l.get("args", {})), l.get("activation"), l.get("skip")) for l in d["layers"]]
        return cls(tuple(d["input_shape"]), layers, d.get("name", ""))


class Network:
    """Executes a :class:`NetworkSpec`.

    Shapes are checked when the network is built.  Pass ``allocate=False`` to
    get shape inference and parameter accounting without allocating weights.
    """

    def __init__(self, spec, dtype=np.float32, allocate=True):
        self.spec = spec
        self.dtype = np.dtype(dtype)
        self.layers = []
        self.activations = []
        shape = tuple(spec.input_shape)
        for i, ls in enumerate(spec.layers):
            kind = _ALIASES.get(ls.kind, ls.kind)
            if kind not in LAYER_KINDS:
                raise ValueError(f"layer {i}: unknown kind {ls.kind!r}")
            try:
                layer = LAYER_KINDS[kind](shape, **ls.args)
            except (TypeError, ValueError) as exc:
                raise ValueError(f"layer {i} ({ls.kind}): {exc}") from exc
            if ls.skip is not None:
                if not 0 <= ls.skip < i:
                    raise ValueError(f"layer {i}: skip source {ls.skip} must be an earlier layer")
                src = self.layers[ls.skip].out_shape
                if src != layer.out_shape:
                    raise ValueError(f"layer {i}: skip from layer {ls.skip} has shape {src}, expected {layer.out_shape}")
            if ls.activation is not None and ls.activation not in _ACTIVATIONS:
                raise ValueError(f"layer {i}: unknown activation {ls.activation!r}")
            if allocate:
                layer.allocate(self.dtype)
            self.layers.append(layer)
            self.activations.append(_ACTIVATIONS[ls.activation](layer.out_shape) if ls.activation else None)
            shape = layer.out_shape
        self.output_shape = shape

    def forward(self, x):
        x = np.asarray(x, dtype=self.dtype)
        outs = []
        for layer, act, ls in zip(self.layers, self.activations, self.spec.layers):
            x = layer.forward(x)
            if ls.skip is not None:
                x = x + outs[ls.skip]
            if act is not None:
                x = act.forward(x)
            outs.append(x)
        return x

    __call__ = forward

    def backward(self, grad_out):
        """Backpropagate ``grad_out``; fills each layer's ``grads``, returns the input grad."""
        pending = [None] * len(self.layers)
        pending[-1] = np.asarray(grad_out, dtype=self.dtype)
        g = None
        for i in range(len(self.layers) - 1, -1, -1):
            g = pending[i]
            pending[i] = None
            if self.activations[i] is not None:
                g = self.activations[i].backward(g)
            skip = self.spec.layers[i].skip
            if skip is not None:
                pending[skip] = g if pending[skip] is None else pending[skip] + g
            g = self.layers[i].backward(g)
            if i > 0:
                pending[i - 1] = g if pending[i - 1] is None else pending[i - 1] + g
        return g

    def predict(self, x, batch_size=64):
        return np.concatenate([self.forward(x[i : i + batch_size]) for i in range(0, len(x), batch_size)])

    def parameters(self):
        """Ordered ``(name, array)`` pairs; this order defines the checkpoint blob."""
        return [(f"{i}.{name}", arr) for i, layer in enumerate(self.layers) for name, arr in layer.params.items()]

    def gradients(self):
        return [layer.grads[name] for layer in self.layers for name in layer.params]

    def set_parameters(self, arrays):
        slots = [(layer, name) for layer in self.layers for name in layer.params]
        if len(arrays) != len(slots):
            raise ValueError(f"expected {len(slots)} parameter arrays, got {len(arrays)}")
        for (layer, name), arr in zip(slots, arrays):
            if arr.shape != layer.params[name].shape:
                raise ValueError(f"parameter {name} has shape {arr.shape}, expected {layer.params[name].shape}")
            layer.params[name] = np.array(arr, dtype=self.dtype)

    @property
    def n_params(self):
        return sum(int(np.prod(s)) for layer in self.layers for s in layer.param_shapes.values())

    def audit(self):
        """Per-layer ``(index, kind, params, mults)`` rows from the counting formulas."""
        rows = []
        for i, layer in enumerate(self.layers):
            cost = layer_cost(layer)
            if cost.params:
                rows.append((i, layer.kind, cost.params, cost.mults))
        return rows

    def summary(self):
        lines = []
        for i, (layer, ls) in enumerate(zip(self.layers, self.spec.layers)):
            n = sum(int(np.prod(s)) for s in layer.param_shapes.values())
            extra = f" +[{ls.skip}]" if ls.skip is not None else ""
            extra += f" {ls.activation}" if ls.activation else ""
            lines.append(f"{i:3d} {layer.kind:<9} {str(layer.out_shape):<22} {n:>10d}{extra}")
        return "\n".join(lines)
