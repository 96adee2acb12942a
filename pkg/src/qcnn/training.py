"""Initialization, losses and the mini-batch training loop."""

import math
import time
from dataclasses import dataclass

import numpy as np

from . import optim
from .layers.functional import softmax_head


def _bound_in_dtype(bound, dtype):
    # largest representable value not exceeding ``bound`` keeps samples inside the interval
    b = np.asarray(bound, dtype=dtype)
    if float(b) > bound:
        b = np.nextafter(b, dtype.type(0))
    return b


def init_quaternion_params(net, rng):
    """Normalized uniform initialization for every layer of ``net``.

    Scales and real weights are drawn from U[-sqrt(6)/sqrt(n_in + n_out), +...]
    with fan_in = C*L^2 and fan_out = K*L^2 for convolutions (N and M for dense
    layers); angles from U[-pi/2, pi/2]; biases start at zero.  Returns the
    parameter list in network order.
    """
    dtype = net.dtype
    half_pi = _bound_in_dtype(math.pi / 2, dtype)
    for layer in net.layers:
        fan_in, fan_out = layer.fans()
        roles = layer.param_roles()
        for name, arr in layer.params.items():
            role = roles[name]
            if role in ("scale", "weight"):
                bound = math.sqrt(6.0) / math.sqrt(fan_in + fan_out)
                b = _bound_in_dtype(bound, dtype)
                vals = rng.uniform(-bound, bound, arr.shape).astype(dtype)
                arr[...] = np.clip(vals, -b, b)
            elif role == "angle":
                vals = rng.uniform(-math.pi / 2, math.pi / 2, arr.shape).astype(dtype)
                arr[...] = np.clip(vals, -half_pi, half_pi)
            else:
                arr[...] = 0
    return [arr for _, arr in net.parameters()]


init_params = init_quaternion_params


def init_bound(fan_in, fan_out):
    return math.sqrt(6.0) / math.sqrt(fan_in + fan_out)


# -- losses ------------------------------------------------------------------


def cross_entropy_loss(probs, labels):
    """Mean of ``-log p[label]`` and its gradient w.r.t. the logits (``p - onehot``)."""
    probs = np.asarray(probs)
    labels = np.asarray(labels)
    single = probs.ndim == 1
    if single:
        probs, labels = probs[None], labels[None]
    n, k = probs.shape
    if np.any(labels < 0) or np.any(labels >= k):
        raise ValueError(f"labels must lie in [0, {k})")
    picked = np.clip(probs[np.arange(n), labels], 1e-12, None)
    loss = float(-np.mean(np.log(picked)))
    grad = probs.copy()
    grad[np.arange(n), labels] -= 1
    grad /= n
    return loss, (grad[0] if single else grad)


def softmax_cross_entropy(logits, labels):
    return cross_entropy_loss(softmax_head(logits), labels)


def mse_loss(output, target):
    output = np.asarray(output)
    target = np.asarray(target)
    if output.shape != target.shape:
        raise ValueError(f"output shape {output.shape} does not match target shape {target.shape}")
    diff = output - target
    return float(np.mean(diff * diff)), 2.0 * diff / diff.size


LOSSES = {"cross_entropy": softmax_cross_entropy, "mse": mse_loss}


# -- training loop -----------------------------------------------------------


@dataclass
class EpochStats:
    loss: float
    batches: int
    seconds: float


def train_step(net, x, y, loss_fn, state):
    out = net.forward(x)
    loss, grad = loss_fn(out, y)
    net.backward(grad)
    params = [arr for _, arr in net.parameters()]
    optim.step(params, net.gradients(), state)
    return loss


def train_epoch(net, inputs, targets, loss_fn, state, batch_size, rng, transform=None):
    """One pass over shuffled mini-batches.

    ``transform(batch_inputs, rng)`` (optional) maps raw samples to network
    input, e.g. augmentation plus layout conversion.  Losses are batch means,
    so gradients are averaged over each batch.  Returns :class:`EpochStats`
    with the sample-weighted mean loss.
    """
    n = len(inputs)
    if n == 0:
        raise ValueError("cannot train on an empty dataset")
    if len(targets) != n:
        raise ValueError(f"{n} inputs but {len(targets)} targets")
    if isinstance(loss_fn, str):
        loss_fn = LOSSES[loss_fn]
    start = time.perf_counter()
    order = rng.permutation(n)
    total, batches = 0.0, 0
    for lo in range(0, n, batch_size):
        idx = order[lo : lo + batch_size]
        x = inputs[idx]
        if transform is not None:
            x = transform(x, rng)
        total += train_step(net, x, targets[idx], loss_fn, state) * len(idx)
        batches += 1
    return EpochStats(total / n, batches, time.perf_counter() - start)
