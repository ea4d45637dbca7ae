"""Deterministic test-image generator.

Smooth random fields made by bilinearly upsampling a coarse seeded grid.
The toy segmenter's Jacobian localizes where the base image drives the
hidden activations near their sensitive range, so spatially structured
inputs (rather than iid pixel noise) are what the bench experiments use.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInput
from .rng import Rng


def random_smooth_image(
    channels: int, h: int, w: int, seed: int, grid: int = 4,
    lo: float = 0.0, hi: float = 1.0,
) -> np.ndarray:
    """[channels, h, w] field, values in [lo, hi), smooth at scale ~h/grid."""
    if channels < 1 or h < 2 or w < 2 or grid < 2:
        raise InvalidInput("need channels >= 1, h, w >= 2, grid >= 2")
    rng = Rng(seed)
    coarse = rng.uniform(channels * grid * grid, lo, hi).reshape(channels, grid, grid)
    ys = np.linspace(0.0, grid - 1.0, h)
    xs = np.linspace(0.0, grid - 1.0, w)
    y0 = np.minimum(ys.astype(np.int64), grid - 2)
    x0 = np.minimum(xs.astype(np.int64), grid - 2)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    out = np.empty((channels, h, w), dtype=np.float64)
    for c in range(channels):
        g = coarse[c]
        tl = g[y0][:, x0]
        tr = g[y0][:, x0 + 1]
        bl = g[y0 + 1][:, x0]
        br = g[y0 + 1][:, x0 + 1]
        top = tl + (tr - tl) * fx
        bot = bl + (br - bl) * fx
        out[c] = top + (bot - top) * fy
    return out
