"""Bit-exact binary tensor container (PTNSR01) and small array helpers.

Layout, all little-endian:

    bytes 0..7    magic  b"PTNSR01\\n"
    bytes 8..11   u32    header length in bytes
    header        UTF-8 JSON  {"shape": [...], "dtype": "f64", "order": "row-major"}
    payload       raw float64 values, row-major, length = 8 * prod(shape)

Round-trips are bit-exact: the payload is the array's memory image.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError

MAGIC = b"PTNSR01\n"


def write_tensor(path, t: np.ndarray) -> None:
    """Write ``t`` (float64) to ``path`` in the PTNSR01 container."""
    arr = np.ascontiguousarray(t, dtype=np.float64)
    if arr.ndim == 0 or any(d < 1 for d in arr.shape):
        raise FormatError(f"shape {arr.shape} has no positive dimensions")
    header = json.dumps(
        {"shape": list(arr.shape), "dtype": "f64", "order": "row-major"},
        separators=(",", ":"),
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(arr.tobytes())


def read_tensor(path) -> np.ndarray:
    """Read a PTNSR01 container back into a float64 array."""
    blob = Path(path).read_bytes()
    if len(blob) < 12 or blob[:8] != MAGIC:
        raise FormatError(f"{path}: bad magic")
    (hlen,) = struct.unpack("<I", blob[8:12])
    if len(blob) < 12 + hlen:
        raise FormatError(f"{path}: truncated header")
    try:
        header = json.loads(blob[12 : 12 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: header is not valid JSON: {exc}") from exc
    if header.get("dtype") != "f64":
        raise FormatError(f"{path}: unsupported dtype {header.get('dtype')!r}")
    if header.get("order") != "row-major":
        raise FormatError(f"{path}: unsupported order {header.get('order')!r}")
    shape = header.get("shape")
    if (
        not isinstance(shape, list)
        or not shape
        or not all(isinstance(d, int) and d >= 1 for d in shape)
    ):
        raise FormatError(f"{path}: bad shape {shape!r}")
    count = int(np.prod(shape))
    payload = blob[12 + hlen :]
    if len(payload) != 8 * count:
        raise FormatError(
            f"{path}: payload holds {len(payload)} bytes, shape wants {8 * count}"
        )
    return np.frombuffer(payload, dtype="<f8").reshape(shape).copy()
