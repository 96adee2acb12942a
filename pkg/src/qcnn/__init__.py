"""CNN layers whose weights act on colour pixels as quaternions, in numpy.

Colour pixels are pure quaternions; a quaternion convolution scales each tap
and rotates it about the gray axis (1, 1, 1)/sqrt(3).
"""

from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .network import LayerSpec, Network, NetworkSpec
from .optim import OptimizerState, make_state
from .presets import build_preset, preset_denoiser, preset_shallow_cifar, preset_vgg_s
from .training import init_quaternion_params, train_epoch

__all__ = [
    "CheckpointError",
    "LayerSpec",
    "Network",
    "NetworkSpec",
    "OptimizerState",
    "build_preset",
    "init_quaternion_params",
    "load_checkpoint",
    "make_state",
    "preset_denoiser",
    "preset_shallow_cifar",
    "preset_vgg_s",
    "save_checkpoint",
    "train_epoch",
]
