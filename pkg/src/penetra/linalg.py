"""Elementary vector algebra on float64 arrays."""

from __future__ import annotations

import numpy as np

from .errors import DegenerateVector, InvalidShape


def l2_norm(v: np.ndarray) -> float:
    """Euclidean norm over all entries."""
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        raise InvalidShape("l2_norm of an empty tensor")
    return float(np.sqrt(np.sum(v * v)))


def normalize(v: np.ndarray) -> np.ndarray:
    """v / ||v||, same shape; raises DegenerateVector on the zero vector."""
    v = np.asarray(v, dtype=np.float64)
    n = l2_norm(v)
    if n == 0.0:
        raise DegenerateVector("cannot normalize the zero vector")
    return v / n


def dot(a: np.ndarray, b: np.ndarray) -> float:
    """Sum of elementwise products; shapes must match exactly."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidShape(f"dot shape mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise InvalidShape("dot of empty tensors")
    return float(np.dot(a.ravel(), b.ravel()))
