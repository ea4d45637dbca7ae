"""Image similarity (SSIM) and segmentation overlap (Dice) metrics.

SSIM follows the original formulation: 11x11 Gaussian window, sigma = 1.5,
C1 = (0.01 L)^2, C2 = (0.03 L)^2, local maps computed in valid mode
(no padding) and averaged over all window positions and channels.  The
dynamic range L is a mandatory argument because tensors here are not 8-bit
images.

Dice binarizes both maps at a threshold (strictly greater) and returns
2|P & R| / (|P| + |R|), defined as 1.0 when both masks are empty.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from . import _kernels
from .errors import InvalidInput, InvalidShape

WINDOW_SIZE = 11
WINDOW_SIGMA = 1.5
K1 = 0.01
K2 = 0.03


@dataclass
class MetricReport:
    ssim: float | None = None
    dice: float | None = None
    eigenvalue: float | None = None
    penetration_ratio: float | None = None
    oracle_evals: int | None = None


def _gaussian_window(size: int = WINDOW_SIZE, sigma: float = WINDOW_SIGMA) -> np.ndarray:
    ax = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(ax * ax) / (2.0 * sigma * sigma))
    win = np.outer(g, g)
    return win / win.sum()


_WINDOW = _gaussian_window()


def ssim(a: np.ndarray, b: np.ndarray, dynamic_range: float) -> float:
    """Mean local SSIM between two [c,h,w] (or [h,w]) images."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidShape(f"ssim shape mismatch: {a.shape} vs {b.shape}")
    if dynamic_range <= 0:
        raise InvalidInput(f"dynamic range must be positive, got {dynamic_range}")
    if a.ndim == 2:
        a = a[None]
        b = b[None]
    if a.ndim != 3:
        raise InvalidShape(f"ssim wants [c,h,w] or [h,w], got {a.shape}")
    h, w = a.shape[1:]
    if h < WINDOW_SIZE or w < WINDOW_SIZE:
        raise InvalidShape(
            f"image {h}x{w} smaller than the {WINDOW_SIZE}x{WINDOW_SIZE} window"
        )
    c1 = (K1 * dynamic_range) ** 2
    c2 = (K2 * dynamic_range) ** 2
    total = 0.0
    count = 0
    for ch in range(a.shape[0]):
        mu_a, mu_b, raw_aa, raw_bb, raw_ab = _kernels.ssim_stat_maps(
            a[ch], b[ch], _WINDOW
        )
        var_a = raw_aa - mu_a * mu_a
        var_b = raw_bb - mu_b * mu_b
        cov = raw_ab - mu_a * mu_b
        num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
        den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
        smap = num / den
        total += float(np.sum(smap))
        count += smap.size
    return total / count


def dice(pred: np.ndarray, ref: np.ndarray, threshold: float = 0.5) -> float:
    """Overlap of the two thresholded masks; 1.0 when both are empty."""
    pred = np.asarray(pred, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if pred.shape != ref.shape:
        raise InvalidShape(f"dice shape mismatch: {pred.shape} vs {ref.shape}")
    if not (np.all(np.isfinite(pred)) and np.all(np.isfinite(ref))):
        raise InvalidInput("dice inputs must be finite")
    p = pred > threshold
    r = ref > threshold
    denom = int(p.sum()) + int(r.sum())
    if denom == 0:
        return 1.0
    return 2.0 * int(np.logical_and(p, r).sum()) / denom


def mean_variance(values) -> tuple[float, float]:
    """Arithmetic mean and population variance (divide by N)."""
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0:
        raise InvalidInput("cannot summarize an empty list")
    mean = float(arr.mean())
    return mean, float(np.mean((arr - mean) ** 2))


def summarize(reports: list[MetricReport]) -> dict[str, tuple[float, float]]:
    """Per-metric (mean, population variance) over the reports.

    Metrics that are None in every report are omitted; None entries are
    skipped per metric.
    """
    if not reports:
        raise InvalidInput("cannot summarize an empty report list")
    out: dict[str, tuple[float, float]] = {}
    for f in fields(MetricReport):
        vals = [getattr(r, f.name) for r in reports if getattr(r, f.name) is not None]
        if vals:
            out[f.name] = mean_variance(vals)
    return out
