"""SGD, RMSProp and Adam updates on lists of numpy arrays.

Updates are applied in place.  ``OptimizerState`` carries the hyperparameters,
the step counter and per-parameter buffers so it can be checkpointed.
"""

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULTS = {
    "sgd": {"lr": 0.01},
    "rmsprop": {"lr": 1e-4, "rho": 0.9, "eps": 1e-8, "decay": 1e-6},
    "adam": {"lr": 1e-3, "beta1": 0.9, "beta2": 0.999, "eps": 1e-8},
}

_BUFFERS = {"sgd": (), "rmsprop": ("acc",), "adam": ("m", "v")}


@dataclass
class OptimizerState:
    name: str
    hyper: dict
    step: int = 0
    buffers: dict = field(default_factory=dict)


def make_state(name, params, **hyper):
    """Fresh state for ``params`` (a list of arrays); unknown hyperparameters raise."""
    if name not in DEFAULTS:
        raise ValueError(f"unknown optimizer {name!r}; choose from {sorted(DEFAULTS)}")
    unknown = set(hyper) - set(DEFAULTS[name])
    if unknown:
        raise ValueError(f"{name} does not take {sorted(unknown)}")
    hp = {**DEFAULTS[name], **{k: float(v) for k, v in hyper.items()}}
    buffers = {b: [np.zeros_like(p) for p in params] for b in _BUFFERS[name]}
    return OptimizerState(name, hp, 0, buffers)


def _check(params, grads):
    if len(params) != len(grads):
        raise ValueError(f"{len(params)} parameters but {len(grads)} gradients")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter shape {p.shape}")


def sgd_step(params, grads, state):
    _check(params, grads)
    lr = state.hyper["lr"]
    for p, g in zip(params, grads):
        p -= lr * g
    state.step += 1
    return params, state


def rmsprop_step(params, grads, state):
    """RMSProp with time-based learning-rate decay ``lr / (1 + decay * t)``."""
    _check(params, grads)
    hp = state.hyper
    lr = hp["lr"] / (1.0 + hp["decay"] * state.step)
    rho, eps = hp["rho"], hp["eps"]
    for p, g, acc in zip(params, grads, state.buffers["acc"]):
        acc *= rho
        acc += (1.0 - rho) * g * g
        p -= lr * g / (np.sqrt(acc) + eps)
    state.step += 1
    return params, state


def adam_step(params, grads, state):
    _check(params, grads)
    hp = state.hyper
    b1, b2, eps = hp["beta1"], hp["beta2"], hp["eps"]
    t = state.step + 1
    # bias corrections folded into the step size
    lr_t = hp["lr"] * math.sqrt(1.0 - b2**t) / (1.0 - b1**t)
    eps_t = eps * math.sqrt(1.0 - b2**t)
    for p, g, m, v in zip(params, grads, state.buffers["m"], state.buffers["v"]):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= lr_t * m / (np.sqrt(v) + eps_t)
    state.step = t
    return params, state


STEPS = {"sgd": sgd_step, "rmsprop": rmsprop_step, "adam": adam_step}


def step(params, grads, state):
    return STEPS[state.name](params, grads, state)
