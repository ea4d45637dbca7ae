"""Both kernel backends agree with the scalar reference and each other."""

import numpy as np
import pytest

from penetra._kernels import _numba, _numpy
from penetra._kernels.scalar_ref import portable_exp, portable_sigmoid, portable_tanh
from penetra.rng import Rng

BACKENDS = [_numpy, _numba]


@pytest.mark.parametrize("backend", BACKENDS)
def test_exp_matches_scalar_reference_bitwise(backend):
    xs = np.concatenate(
        [
            Rng(1).uniform(200, -30.0, 30.0),
            np.array([0.0, -0.0, 1.0, -1.0, 708.0, -744.0, 710.0, -746.0]),
        ]
    )
    got = backend.exp_map(xs)
    expected = np.array([portable_exp(float(x)) for x in xs])
    assert got.tobytes() == expected.tobytes()


@pytest.mark.parametrize("backend", BACKENDS)
def test_tanh_sigmoid_match_scalar_reference_bitwise(backend):
    xs = np.concatenate(
        [
            Rng(2).uniform(200, -25.0, 25.0),
            np.array([0.0, -0.0, 20.0, -20.0, 20.5, -20.5]),
        ]
    )
    t = backend.tanh_map(xs)
    s = backend.sigmoid_map(xs)
    assert t.tobytes() == np.array([portable_tanh(float(x)) for x in xs]).tobytes()
    assert s.tobytes() == np.array([portable_sigmoid(float(x)) for x in xs]).tobytes()


def test_exp_accuracy_vs_libm():
    xs = Rng(3).uniform(500, -20.0, 20.0)
    rel = np.abs(_numpy.exp_map(xs) - np.exp(xs)) / np.exp(xs)
    assert rel.max() < 1e-14


def test_tanh_sigmoid_accuracy_vs_libm():
    xs = Rng(4).uniform(500, -10.0, 10.0)
    assert np.abs(_numpy.tanh_map(xs) - np.tanh(xs)).max() < 1e-14
    assert np.abs(_numpy.sigmoid_map(xs) - 1.0 / (1.0 + np.exp(-xs))).max() < 1e-14


def test_backends_agree_bitwise_on_conv():
    rng = Rng(5)
    x = rng.uniform(3 * 12 * 10, -1.0, 1.0).reshape(3, 12, 10)
    w = rng.uniform(4 * 3 * 9, -0.5, 0.5).reshape(4, 3, 3, 3)
    b = rng.uniform(4, -0.1, 0.1)
    assert _numpy.conv3x3(x, w, b).tobytes() == _numba.conv3x3(x, w, b).tobytes()


def test_conv_matches_direct_loop():
    rng = Rng(6)
    x = rng.uniform(2 * 7 * 7, -1.0, 1.0).reshape(2, 7, 7)
    w = rng.uniform(3 * 2 * 9, -0.5, 0.5).reshape(3, 2, 3, 3)
    b = rng.uniform(3, -0.2, 0.2)
    out = _numpy.conv3x3(x, w, b)
    # independent re-computation, different loop organization
    expected = np.zeros((3, 7, 7))
    for co in range(3):
        for y in range(7):
            for xx in range(7):
                acc = b[co]
                for ci in range(2):
                    for ky in range(3):
                        for kx in range(3):
                            iy, ix = y + ky - 1, xx + kx - 1
                            if 0 <= iy < 7 and 0 <= ix < 7:
                                acc += w[co, ci, ky, kx] * x[ci, iy, ix]
                expected[co, y, xx] = acc
    assert np.allclose(out, expected, rtol=0, atol=1e-15)


def test_backends_agree_on_ssim_stats():
    rng = Rng(7)
    a = rng.uniform(16 * 16, 0.0, 1.0).reshape(16, 16)
    b = rng.uniform(16 * 16, 0.0, 1.0).reshape(16, 16)
    win = np.full((11, 11), 1.0 / 121.0)
    for m_np, m_nb in zip(_numpy.ssim_stat_maps(a, b, win), _numba.ssim_stat_maps(a, b, win)):
        assert np.allclose(m_np, m_nb, rtol=0, atol=1e-15)
