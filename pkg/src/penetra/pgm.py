"""8-bit PGM export of single-channel maps, for eyeballing perturbations.

Values are min-max scaled to 0..255; the scaling is recorded in a JSON
sidecar next to the image so the mapping stays invertible.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InvalidShape


def write_pgm(path, plane: np.ndarray, sidecar: bool = True) -> None:
    plane = np.asarray(plane, dtype=np.float64)
    if plane.ndim == 3 and plane.shape[0] == 1:
        plane = plane[0]
    if plane.ndim != 2:
        raise InvalidShape(f"PGM export wants [h,w] or [1,h,w], got {plane.shape}")
    lo = float(plane.min())
    hi = float(plane.max())
    span = hi - lo
    if span == 0.0:
        scaled = np.zeros_like(plane)
    else:
        scaled = (plane - lo) / span * 255.0
    img = np.rint(scaled).astype(np.uint8)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
    if sidecar:
        meta = {"min": lo, "max": hi, "levels": 255, "mapping": "(v - min) / (max - min) * 255"}
        Path(str(path) + ".json").write_text(json.dumps(meta, sort_keys=True) + "\n")
