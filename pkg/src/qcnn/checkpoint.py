"""Binary checkpoint format.

Layout::

    b"QCNN"                     magic
    u8                          format version (1)
    u32 LE                      manifest length in bytes
    manifest                    UTF-8 JSON: network spec, parameter names and
                                shapes, optimizer hyperparameters, seed
    float32 LE * n_params       parameters in manifest order
    [u64 LE + float32 LE ...]   optional optimizer buffers, length-prefixed

Parameters are stored as IEEE-754 binary32, so a round trip is bit-exact for
single-precision networks; double-precision parameters are rounded.
"""

import json
import struct

import numpy as np

from .network import Network, NetworkSpec
from .optim import OptimizerState

MAGIC = b"QCNN"
VERSION = 1


class CheckpointError(ValueError):
    pass


def _pack(arrays):
    return b"".join(np.asarray(a, dtype="<f4").tobytes() for a in arrays)


def save_checkpoint(path, net, state=None, seed=None, extra=None):
    params = net.parameters()
    manifest = {
        "format": VERSION,
        "network": net.spec.to_dict(),
        "precision": "double" if net.dtype == np.float64 else "single",
        "params": [[name, list(arr.shape)] for name, arr in params],
        "seed": seed,
        "extra": extra or {},
        "optimizer": None,
    }
    opt_blob = b""
    if state is not None:
        names = sorted(state.buffers)
        manifest["optimizer"] = {
            "name": state.name,
            "hyper": state.hyper,
            "step": state.step,
            "buffers": names,
        }
        opt_blob = _pack(a for b in names for a in state.buffers[b])
    text = json.dumps(manifest, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<BI", VERSION, len(text)))
        fh.write(text)
        fh.write(_pack(arr for _, arr in params))
        if state is not None:
            fh.write(struct.pack("<Q", len(opt_blob)))
            fh.write(opt_blob)


def _take(buf, pos, count, what):
    end = pos + count
    if end > len(buf):
        raise CheckpointError(f"truncated checkpoint: {what} needs {count} bytes, only {len(buf) - pos} left")
    return buf[pos:end], end


def _unpack(buf, shapes):
    out, pos = [], 0
    for shape in shapes:
        n = int(np.prod(shape))
        out.append(np.frombuffer(buf, dtype="<f4", count=n, offset=pos).reshape(shape).copy())
        pos += 4 * n
    return out


def load_checkpoint(path):
    """Returns ``(network, optimizer_state_or_None, manifest)``."""
    with open(path, "rb") as fh:
        buf = fh.read()
    magic, pos = _take(buf, 0, 4, "magic")
    if magic != MAGIC:
        raise CheckpointError(f"not a QCNN checkpoint (magic {magic!r})")
    head, pos = _take(buf, pos, 5, "header")
    version, mlen = struct.unpack("<BI", head)
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}; this build reads version {VERSION}")
    text, pos = _take(buf, pos, mlen, "manifest")
    try:
        manifest = json.loads(text.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"corrupt manifest: {exc}") from exc

    dtype = np.float64 if manifest["precision"] == "double" else np.float32
    net = Network(NetworkSpec.from_dict(manifest["network"]), dtype=dtype)
    shapes = [tuple(s) for _, s in manifest["params"]]
    nbytes = 4 * sum(int(np.prod(s)) for s in shapes)
    blob, pos = _take(buf, pos, nbytes, "parameter blob")
    net.set_parameters(_unpack(blob, shapes))

    state = None
    opt = manifest.get("optimizer")
    if opt is not None:
        head, pos = _take(buf, pos, 8, "optimizer length prefix")
        (olen,) = struct.unpack("<Q", head)
        oblob, pos = _take(buf, pos, olen, "optimizer blob")
        names = opt["buffers"]
        if nbytes * len(names) != olen:
            raise CheckpointError("optimizer blob length does not match the parameter shapes")
        arrays = _unpack(oblob, shapes * len(names))
        buffers = {
            name: [a.astype(dtype) for a in arrays[i * len(shapes) : (i + 1) * len(shapes)]]
            for i, name in enumerate(names)
        }
        state = OptimizerState(opt["name"], opt["hyper"], opt["step"], buffers)
    if pos != len(buf):
        raise CheckpointError(f"{len(buf) - pos} trailing bytes after checkpoint payload")
    return net, state, manifest
