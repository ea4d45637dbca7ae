"""Builtin toy segmentation oracle.

A fixed two-layer convolutional network standing in for a full-scale
segmentation DNN: [3, h, w] image in, [1, h, w] sigmoid map out, smooth in
its input.  The architecture is frozen so an independent implementation can
reproduce it exactly:

    conv1: 3 -> 8 channels, 3x3 kernel, zero padding 1, bias, tanh
    conv2: 8 -> 1 channels, 3x3 kernel, zero padding 1, bias, sigmoid

Weights are drawn from the SplitMix64 stream of the seed, uniform in
[-scale, scale), in this exact order: conv1 weights (row-major over
[out, in, ky, kx]), conv1 bias, conv2 weights, conv2 bias.

``wire32=True`` switches to wire-precision mode: the input and every layer
boundary (pre-activation and activation) are rounded to float32.  In that
mode the forward pass is reproducible bit for bit by the external reference
server, which is what the protocol parity tests check.  Default mode keeps
full float64 precision, which the finite-difference tests need.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .errors import InvalidInput
from .oracle import Oracle, OracleInfo
from .rng import Rng

HIDDEN_CHANNELS = 8
W1_SCALE = 0.75
B1_SCALE = 0.30
W2_SCALE = 0.80
B2_SCALE = 0.60

SIZE_MIN = 8
SIZE_MAX = 64


def toyseg_weights(seed: int):
    """The frozen weight tensors (w1, b1, w2, b2) for a seed."""
    rng = Rng(seed)
    c = HIDDEN_CHANNELS
    w1 = rng.uniform(c * 3 * 3 * 3, -W1_SCALE, W1_SCALE).reshape(c, 3, 3, 3)
    b1 = rng.uniform(c, -B1_SCALE, B1_SCALE)
    w2 = rng.uniform(1 * c * 3 * 3, -W2_SCALE, W2_SCALE).reshape(1, c, 3, 3)
    b2 = rng.uniform(1, -B2_SCALE, B2_SCALE)
    return w1, b1, w2, b2


def _f32(a: np.ndarray) -> np.ndarray:
    return a.astype(np.float32).astype(np.float64)


class ToySegmenter(Oracle):
    kind = "toy-segmenter"

    def __init__(self, seed: int, h: int, w: int, wire32: bool = False):
        if not (SIZE_MIN <= h <= SIZE_MAX and SIZE_MIN <= w <= SIZE_MAX):
            raise InvalidInput(
                f"toyseg size {h}x{w} outside supported range "
                f"{SIZE_MIN}..{SIZE_MAX}"
            )
        self.seed = seed
        self.wire32 = wire32
        self.w1, self.b1, self.w2, self.b2 = toyseg_weights(seed)
        name = f"toyseg(seed={seed},{h}x{w}{',f32' if wire32 else ''})"
        super().__init__(OracleInfo(name, (3, h, w), (1, h, w)))

    def _forward(self, x):
        if self.wire32:
            x = _f32(x)
        z1 = _kernels.conv3x3(x, self.w1, self.b1)
        if self.wire32:
            z1 = _f32(z1)
        h1 = _kernels.tanh_map(z1)
        if self.wire32:
            h1 = _f32(h1)
        z2 = _kernels.conv3x3(h1, self.w2, self.b2)
        if self.wire32:
            z2 = _f32(z2)
        y = _kernels.sigmoid_map(z2)
        if self.wire32:
            y = _f32(y)
        return y


def make_toy_segmenter(seed: int, h: int = 32, w: int = 32, wire32: bool = False):
    return ToySegmenter(seed, h, w, wire32=wire32)
