"""Writers for the heatmap file formats consumed by the pqah pipeline.

Two interchangeable encodings are produced:

* ``png16``: single-channel 16-bit grayscale PNG where a stored sample ``v``
  decodes to ``v / 65535``.
* ``f32``: raw little-endian grid with an 8-byte header (magic ``PQF1``,
  then width and height as u32) followed by row-major float32 values.

Values outside ``[0, 1]`` are rejected so every emitted file is loadable by
the downstream scorer without further checks.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image

F32_MAGIC = b"PQF1"
_F32_HEADER = struct.Struct("<4sII")

FORMATS = ("png16", "f32")


def _checked(values: np.ndarray) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError("heatmap must be a non-empty 2-D array")
    if not np.all(np.isfinite(arr)):
        raise ValueError("heatmap contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("heatmap values must lie in [0, 1]")
    return arr


def write_heatmap_png16(path: Path, values: np.ndarray) -> None:
    """Write a heatmap as a 16-bit grayscale PNG."""
    arr = _checked(values)
    samples = np.rint(arr * 65535.0).astype(np.uint16)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(samples).save(path, format="PNG")


def write_heatmap_f32(path: Path, values: np.ndarray) -> None:
    """Write a heatmap as a raw float32 grid with a PQF1 header."""
    arr = _checked(values)
    height, width = arr.shape
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_F32_HEADER.pack(F32_MAGIC, width, height))
        fh.write(arr.astype("<f4").tobytes(order="C"))


def write_heatmap(path: Path, values: np.ndarray, fmt: str) -> None:
    """Dispatch to the writer for ``fmt`` (one of ``FORMATS``)."""
    if fmt == "png16":
        write_heatmap_png16(path, values)
    elif fmt == "f32":
        write_heatmap_f32(path, values)
    else:
        raise ValueError(f"unknown heatmap format: {fmt!r}")


def heatmap_suffix(fmt: str) -> str:
    """File suffix used for heatmaps of the given format."""
    if fmt == "png16":
        return ".png"
    if fmt == "f32":
        return ".f32"
    raise ValueError(f"unknown heatmap format: {fmt!r}")
