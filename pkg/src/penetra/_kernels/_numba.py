"""numba-jitted kernels (default backend).

Strict IEEE arithmetic (no fastmath): reassociation would break the
cross-backend and cross-language bit-exactness these kernels promise.
"""

import math

import numpy as np
from numba import njit

from .scalar_ref import (
    EXP_COEFFS,
    EXP_HI,
    EXP_LO,
    INV_LN2,
    LN2_HI,
    LN2_LO,
    TANH_SAT,
)

_C = np.array(EXP_COEFFS, dtype=np.float64)


@njit(cache=True)
def _exp1(x):
    if x > EXP_HI:
        return np.inf
    if x < EXP_LO:
        return 0.0
    k = math.floor(x * INV_LN2 + 0.5)
    r = (x - k * LN2_HI) - k * LN2_LO
    p = _C[13]
    for j in range(12, -1, -1):
        p = _C[j] + r * p
    return math.ldexp(p, int(k))


@njit(cache=True)
def _tanh1(x):
    a = -x if x < 0.0 else x
    if a > TANH_SAT:
        t = 1.0
    else:
        e = _exp1(-2.0 * a)
        t = (1.0 - e) / (1.0 + e)
    return -t if x < 0.0 else t


@njit(cache=True)
def _sigmoid1(x):
    if x >= 0.0:
        return 1.0 / (1.0 + _exp1(-x))
    e = _exp1(x)
    return e / (1.0 + e)


@njit(cache=True)
def _map1(flat, out, which):
    for i in range(flat.size):
        if which == 0:
            out[i] = _exp1(flat[i])
        elif which == 1:
            out[i] = _tanh1(flat[i])
        else:
            out[i] = _sigmoid1(flat[i])


def _map(x, which):
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty(x.size, dtype=np.float64)
    _map1(x.ravel(), out, which)
    return out.reshape(x.shape)


def exp_map(x):
    return _map(x, 0)


def tanh_map(x):
    return _map(x, 1)


def sigmoid_map(x):
    return _map(x, 2)


@njit(cache=True)
def _conv3x3(x, w, b, out):
    cin, h, wd = x.shape
    cout = w.shape[0]
    for co in range(cout):
        for y in range(h):
            for xx in range(wd):
                acc = b[co]
                for ci in range(cin):
                    for ky in range(3):
                        iy = y + ky - 1
                        if iy < 0 or iy >= h:
                            continue
                        for kx in range(3):
                            ix = xx + kx - 1
                            if ix < 0 or ix >= wd:
                                continue
                            acc += w[co, ci, ky, kx] * x[ci, iy, ix]
                out[co, y, xx] = acc


def conv3x3(x, w, b):
    """3x3 convolution with zero padding 1; see the numpy twin for layout."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty((w.shape[0], x.shape[1], x.shape[2]), dtype=np.float64)
    _conv3x3(x, w, b, out)
    return out


@njit(cache=True)
def _ssim_stats(a, b, win, mu_a, mu_b, raw_aa, raw_bb, raw_ab):
    k = win.shape[0]
    oh, ow = mu_a.shape
    for y in range(oh):
        for x in range(ow):
            sa = 0.0
            sb = 0.0
            saa = 0.0
            sbb = 0.0
            sab = 0.0
            for ky in range(k):
                for kx in range(k):
                    wgt = win[ky, kx]
                    va = a[y + ky, x + kx]
                    vb = b[y + ky, x + kx]
                    sa += wgt * va
                    sb += wgt * vb
                    saa += wgt * va * va
                    sbb += wgt * vb * vb
                    sab += wgt * va * vb
            mu_a[y, x] = sa
            mu_b[y, x] = sb
            raw_aa[y, x] = saa
            raw_bb[y, x] = sbb
            raw_ab[y, x] = sab


def ssim_stat_maps(a, b, win):
    """Gaussian-windowed moments, valid mode; see the numpy twin."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    k = win.shape[0]
    oh, ow = a.shape[0] - k + 1, a.shape[1] - k + 1
    maps = tuple(np.empty((oh, ow), dtype=np.float64) for _ in range(5))
    _ssim_stats(a, b, np.ascontiguousarray(win, dtype=np.float64), *maps)
    return maps
