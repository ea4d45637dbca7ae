"""Pure-numpy kernel implementations (fallback backend).

Each kernel reproduces the per-element accumulation order of its numba twin
exactly: convolution contributions are added in (cin, ky, kx) order starting
from the bias, so both backends (and the TypeScript reference server) agree
bit for bit.
"""

import numpy as np

from .scalar_ref import (
    EXP_COEFFS,
    EXP_HI,
    EXP_LO,
    INV_LN2,
    LN2_HI,
    LN2_LO,
    TANH_SAT,
)


def exp_map(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    xc = np.clip(x, EXP_LO, EXP_HI)
    k = np.floor(xc * INV_LN2 + 0.5)
    r = (xc - k * LN2_HI) - k * LN2_LO
    p = np.full_like(r, EXP_COEFFS[13])
    for j in range(12, -1, -1):
        p = EXP_COEFFS[j] + r * p
    out = np.ldexp(p, k.astype(np.int32))
    out = np.where(x > EXP_HI, np.inf, out)
    return np.where(x < EXP_LO, 0.0, out)


def tanh_map(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    a = np.where(x < 0.0, -x, x)
    e = exp_map(-2.0 * a)
    t = (1.0 - e) / (1.0 + e)
    t = np.where(a > TANH_SAT, 1.0, t)
    return np.where(x < 0.0, -t, t)


def sigmoid_map(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    e = exp_map(np.where(x >= 0.0, -x, x))
    return np.where(x >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))


def conv3x3(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """3x3 convolution with zero padding 1.

    x: [cin, h, w], w: [cout, cin, 3, 3], b: [cout] -> [cout, h, w].
    """
    cin, h, wd = x.shape
    cout = w.shape[0]
    out = np.empty((cout, h, wd), dtype=np.float64)
    for co in range(cout):
        acc = np.full((h, wd), b[co], dtype=np.float64)
        for ci in range(cin):
            for ky in range(3):
                oy0, oy1 = max(0, 1 - ky), min(h, h - ky + 1)
                for kx in range(3):
                    ox0, ox1 = max(0, 1 - kx), min(wd, wd - kx + 1)
                    acc[oy0:oy1, ox0:ox1] += w[co, ci, ky, kx] * x[
                        ci, oy0 + ky - 1 : oy1 + ky - 1, ox0 + kx - 1 : ox1 + kx - 1
                    ]
        out[co] = acc
    return out


def ssim_stat_maps(a, b, win):
    """Gaussian-windowed first and raw second moments, valid mode.

    a, b: [h, w]; win: [K, K] normalized weights.
    Returns (mu_a, mu_b, raw_aa, raw_bb, raw_ab), each [h-K+1, w-K+1].
    """
    h, w = a.shape
    k = win.shape[0]
    oh, ow = h - k + 1, w - k + 1
    mu_a = np.zeros((oh, ow))
    mu_b = np.zeros((oh, ow))
    raw_aa = np.zeros((oh, ow))
    raw_bb = np.zeros((oh, ow))
    raw_ab = np.zeros((oh, ow))
    for ky in range(k):
        for kx in range(k):
            wgt = win[ky, kx]
            wa = a[ky : ky + oh, kx : kx + ow]
            wb = b[ky : ky + oh, kx : kx + ow]
            mu_a += wgt * wa
            mu_b += wgt * wb
            raw_aa += wgt * wa * wa
            raw_bb += wgt * wb * wb
            raw_ab += wgt * wa * wb
    return mu_a, mu_b, raw_aa, raw_bb, raw_ab
