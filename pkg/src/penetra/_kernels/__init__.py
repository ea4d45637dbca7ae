"""Hot numeric kernels with two interchangeable backends.

``PENETRA_KERNELS`` selects the backend at import time:

    numba   jitted loops (the default when numba imports cleanly)
    numpy   pure-numpy fallback, no compilation
    auto    numba if available, else numpy

Both backends implement the identical accumulation order, so results agree
bit for bit; ``benchmarks/bench_kernels.py`` compares their speed.
"""

import os

from .scalar_ref import portable_exp, portable_sigmoid, portable_tanh

_choice = os.environ.get("PENETRA_KERNELS", "auto").strip().lower()
if _choice not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"PENETRA_KERNELS={_choice!r}: expected 'numba', 'numpy', or 'auto'"
    )

if _choice == "numpy":
    from ._numpy import conv3x3, exp_map, sigmoid_map, ssim_stat_maps, tanh_map

    BACKEND = "numpy"
else:
    try:
        from ._numba import conv3x3, exp_map, sigmoid_map, ssim_stat_maps, tanh_map

        BACKEND = "numba"
    except ImportError:
        if _choice == "numba":
            raise
        from ._numpy import conv3x3, exp_map, sigmoid_map, ssim_stat_maps, tanh_map

        BACKEND = "numpy"

__all__ = [
    "BACKEND",
    "conv3x3",
    "exp_map",
    "sigmoid_map",
    "ssim_stat_maps",
    "tanh_map",
    "portable_exp",
    "portable_sigmoid",
    "portable_tanh",
]
