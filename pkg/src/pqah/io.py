"""On-disk formats and loaders: manifests, indexed part masks, heatmaps.

All loaders return immutable objects that are safe to share across workers.
Formats:
  - manifest: JSON {"dataset": str, "entries": [{"id", "category", "mask_path",
    "heatmap_path", "label_map"}]}; file paths are relative to the manifest dir
  - part mask: 8-bit indexed/grayscale PNG, pixel value = part index, 0 = background
  - heatmap: 8/16-bit grayscale PNG, or the raw F32 grid ("PQF1" magic)
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import HeatmapError, ManifestError, MaskError

F32_MAGIC = b"PQF1"
_F32_HEADER = struct.Struct("<4sII")
_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


@dataclass(frozen=True)
class ImageEntry:
    id: str
    category: str
    mask_path: str
    heatmap_path: str
    label_map: dict[int, str]  # part index (>0) -> part name, in manifest order


@dataclass(frozen=True)
class Manifest:
    dataset: str
    entries: tuple[ImageEntry, ...]
    root: Path = field(default_factory=Path)  # directory paths resolve against

    def resolve(self, relpath: str) -> Path:
        return self.root / relpath


@dataclass(frozen=True, eq=False)
class PartMaskSet:
    width: int
    height: int
    category: str
    parts: dict[str, np.ndarray]  # part name -> bool grid, disjoint by construction
    foreground: np.ndarray  # bool grid, union of all part grids


@dataclass(frozen=True, eq=False)
class Heatmap:
    values: np.ndarray  # float64 grid, shape (height, width), values in [0, 1]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


def _parse_label_map(raw, entry_id):
    if not isinstance(raw, dict) or not raw:
        raise ManifestError(f"entry {entry_id!r}: label_map must be a non-empty object")
    label_map = {}
    for key, name in raw.items():
        try:
            idx = int(key)
        except (TypeError, ValueError):
            raise ManifestError(f"entry {entry_id!r}: label_map key {key!r} is not an integer")
        if idx == 0:
            raise ManifestError(f"entry {entry_id!r}: index 0 reserved for background")
        if idx < 0 or idx > 255:
            raise ManifestError(f"entry {entry_id!r}: part index {idx} outside 1..255")
        if not isinstance(name, str) or not name:
            raise ManifestError(f"entry {entry_id!r}: part name for index {idx} must be a non-empty string")
        if idx in label_map:
            raise ManifestError(f"entry {entry_id!r}: duplicate part index {idx}")
        label_map[idx] = name
    names = list(label_map.values())
    if len(set(names)) != len(names):
        raise ManifestError(f"entry {entry_id!r}: duplicate part names in label_map")
    return label_map


def load_manifest(path: str | Path) -> Manifest:
    """Load and validate a manifest JSON file."""
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest {path} is not valid JSON: {exc}") from exc

    if not isinstance(data, dict):
        raise ManifestError(f"manifest {path}: top level must be an object")
    dataset = data.get("dataset")
    if not isinstance(dataset, str):
        raise ManifestError(f"manifest {path}: missing string field 'dataset'")
    raw_entries = data.get("entries")
    if not isinstance(raw_entries, list):
        raise ManifestError(f"manifest {path}: missing list field 'entries'")

    entries = []
    seen_ids = set()
    for pos, raw in enumerate(raw_entries):
        if not isinstance(raw, dict):
            raise ManifestError(f"manifest {path}: entry #{pos} is not an object")
        try:
            entry_id = raw["id"]
            category = raw["category"]
            mask_path = raw["mask_path"]
            heatmap_path = raw["heatmap_path"]
            raw_label_map = raw["label_map"]
        except KeyError as exc:
            raise ManifestError(f"manifest {path}: entry #{pos} missing field {exc}") from exc
        for fname, value in (("id", entry_id), ("category", category),
                             ("mask_path", mask_path), ("heatmap_path", heatmap_path)):
            if not isinstance(value, str) or not value:
                raise ManifestError(f"manifest {path}: entry #{pos} field {fname!r} must be a non-empty string")
        if entry_id in seen_ids:
            raise ManifestError(f"manifest {path}: duplicate image id {entry_id!r}")
        seen_ids.add(entry_id)
        entries.append(ImageEntry(
            id=entry_id,
            category=category,
            mask_path=mask_path,
            heatmap_path=heatmap_path,
            label_map=_parse_label_map(raw_label_map, entry_id),
        ))
    return Manifest(dataset=dataset, entries=tuple(entries), root=path.resolve().parent)


def write_manifest(manifest: Manifest, path: str | Path) -> None:
    data = {
        "dataset": manifest.dataset,
        "entries": [
            {
                "id": e.id,
                "category": e.category,
                "mask_path": e.mask_path,
                "heatmap_path": e.heatmap_path,
                "label_map": {str(k): v for k, v in e.label_map.items()},
            }
            for e in manifest.entries
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def read_indexed_mask(path: str | Path) -> np.ndarray:
    """Read an indexed mask PNG as a uint8 index array."""
    try:
        with Image.open(path) as img:
            if img.mode not in ("L", "P"):
                raise MaskError(f"mask {path}: expected 8-bit indexed PNG, got mode {img.mode!r}")
            return np.asarray(img, dtype=np.uint8)
    except (OSError, UnidentifiedImageError) as exc:
        raise MaskError(f"cannot read mask {path}: {exc}") from exc


def write_indexed_png(path: str | Path, indices: np.ndarray) -> None:
    """Write a uint8 index array as an 8-bit grayscale PNG."""
    arr = np.asarray(indices)
    if arr.dtype != np.uint8:
        if arr.min() < 0 or arr.max() > 255:
            raise ValueError("index values outside 0..255")
        arr = arr.astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path, format="PNG")


def load_part_masks(entry: ImageEntry, root: str | Path = ".") -> PartMaskSet:
    """Decode an entry's indexed mask into per-part binary grids.

    Every nonzero pixel value must appear in the entry's label_map; part grids
    are disjoint by construction and their union is the foreground.
    """
    indices = read_indexed_mask(Path(root) / entry.mask_path)
    present = np.unique(indices)
    known = set(entry.label_map)
    for value in present:
        if value != 0 and int(value) not in known:
            raise MaskError(f"mask {entry.mask_path}: unmapped part index {int(value)}")
    parts = {name: indices == idx for idx, name in entry.label_map.items()}
    height, width = indices.shape
    return PartMaskSet(
        width=width,
        height=height,
        category=entry.category,
        parts=parts,
        foreground=indices != 0,
    )


def encode_part_masks(masks: PartMaskSet, label_map: dict[int, str]) -> np.ndarray:
    """Inverse of load_part_masks: rebuild the uint8 index array."""
    indices = np.zeros((masks.height, masks.width), dtype=np.uint8)
    for idx, name in label_map.items():
        indices[masks.parts[name]] = idx
    return indices


def _heatmap_from_png(path: Path) -> Heatmap:
    try:
        with Image.open(path) as img:
            mode = img.mode
            arr = np.asarray(img)
    except (OSError, UnidentifiedImageError) as exc:
        raise HeatmapError(f"cannot read heatmap {path}: {exc}") from exc
    if mode == "L":
        scale = 255.0
    elif mode in ("I", "I;16", "I;16B"):
        scale = 65535.0
    else:
        raise HeatmapError(f"heatmap {path}: expected 8- or 16-bit grayscale PNG, got mode {mode!r}")
    return Heatmap(values=arr.astype(np.float64) / scale)


def _heatmap_from_f32(path: Path, data: bytes) -> Heatmap:
    if len(data) < _F32_HEADER.size:
        raise HeatmapError(f"heatmap {path}: truncated F32 grid header")
    magic, width, height = _F32_HEADER.unpack_from(data)
    if magic != F32_MAGIC:
        raise HeatmapError(f"heatmap {path}: bad F32 grid magic {magic!r}")
    expected = _F32_HEADER.size + 4 * width * height
    if len(data) != expected:
        raise HeatmapError(f"heatmap {path}: F32 grid payload is {len(data)} bytes, expected {expected}")
    values = np.frombuffer(data, dtype="<f4", offset=_F32_HEADER.size).reshape(height, width)
    values = values.astype(np.float64)
    if not np.all(np.isfinite(values)):
        raise HeatmapError(f"heatmap {path}: non-finite value in F32 grid")
    if values.size and (values.min() < 0.0 or values.max() > 1.0):
        raise HeatmapError(f"heatmap {path}: value out of range [0, 1]")
    return Heatmap(values=values)


def load_heatmap(path: str | Path) -> Heatmap:
    """Load a heatmap from an 8/16-bit grayscale PNG or an F32 grid file.

    PNG pixel v maps to v / (2^bits - 1); F32 grids load verbatim and are
    rejected if any value is non-finite or outside [0, 1].
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise HeatmapError(f"cannot read heatmap {path}: {exc}") from exc
    if data[:4] == F32_MAGIC:
        return _heatmap_from_f32(path, data)
    if data[: len(_PNG_MAGIC)] == _PNG_MAGIC:
        return _heatmap_from_png(path)
    raise HeatmapError(f"heatmap {path}: unsupported format (expected PNG or F32 grid)")


def write_f32_grid(path: str | Path, heatmap: Heatmap) -> None:
    """Write a heatmap as the little-endian F32 grid format."""
    values = np.asarray(heatmap.values, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(_F32_HEADER.pack(F32_MAGIC, heatmap.width, heatmap.height))
        fh.write(values.tobytes(order="C"))


def write_heatmap_png(path: str | Path, heatmap: Heatmap, bits: int = 16) -> None:
    """Quantize a heatmap to an 8- or 16-bit grayscale PNG."""
    if bits not in (8, 16):
        raise ValueError(f"unsupported PNG bit depth {bits}")
    top = (1 << bits) - 1
    quantized = np.rint(np.asarray(heatmap.values, dtype=np.float64) * top)
    if bits == 8:
        img = Image.fromarray(quantized.astype(np.uint8), mode="L")
    else:
        img = Image.fromarray(quantized.astype(np.uint16))
    img.save(path, format="PNG")


def resize_bilinear(heatmap: Heatmap, target_w: int, target_h: int) -> Heatmap:
    """Bilinear resize with half-pixel-center mapping.

    src = (dst + 0.5) * scale - 0.5, clamped to the source range; output
    values stay within the input's [min, max].
    """
    if target_w < 1 or target_h < 1:
        raise ValueError(f"target dimensions must be >= 1, got {target_w}x{target_h}")
    values = heatmap.values
    src_h, src_w = values.shape
    if (src_w, src_h) == (target_w, target_h):
        return Heatmap(values=values.copy())

    sx = np.clip((np.arange(target_w) + 0.5) * (src_w / target_w) - 0.5, 0.0, src_w - 1.0)
    sy = np.clip((np.arange(target_h) + 0.5) * (src_h / target_h) - 0.5, 0.0, src_h - 1.0)
    x0 = np.floor(sx).astype(np.intp)
    y0 = np.floor(sy).astype(np.intp)
    x1 = np.minimum(x0 + 1, src_w - 1)
    y1 = np.minimum(y0 + 1, src_h - 1)
    fx = sx - x0
    fy = (sy - y0)[:, None]

    top = values[np.ix_(y0, x0)] * (1.0 - fx) + values[np.ix_(y0, x1)] * fx
    bottom = values[np.ix_(y1, x0)] * (1.0 - fx) + values[np.ix_(y1, x1)] * fx
    return Heatmap(values=top * (1.0 - fy) + bottom * fy)
