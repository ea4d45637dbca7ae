"""Deterministic random numbers, identical on every platform and language.

The generator is SplitMix64: 64-bit counter state advanced by the golden
ratio, output scrambled by two xor-multiply rounds.  It is implemented with
plain integer arithmetic so an independent implementation (the TypeScript
reference oracle server reuses the exact algorithm) produces the identical
stream bit for bit.  Uniform doubles in [0, 1) take the top 53 bits of the
output word.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# FNV-1a, used only to fold string labels into derived seeds.
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


class Rng:
    """SplitMix64 stream with a 64-bit seed.

    Single-owner by convention: never share one instance across tasks.
    """

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        self._state = self.seed

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        return _mix(self._state)

    def random(self) -> float:
        """Uniform double in [0, 1), 53-bit mantissa fill."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, size: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
        """Vector of uniform doubles in [lo, hi)."""
        span = hi - lo
        out = np.empty(size, dtype=np.float64)
        for i in range(size):
            out[i] = lo + span * self.random()
        return out


def derive_seed(base_seed: int, label: str) -> int:
    """Stable sub-seed for (base seed, label), e.g. one per bench input."""
    h = _FNV_OFFSET
    for byte in label.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return _mix((base_seed ^ h) & _MASK64)
