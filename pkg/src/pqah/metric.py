"""Per-image scoring: binarization, approximate precision, part recall, PH.

The per-part score combines the object-level approximate precision (the part's
own precision is unobservable because no per-part heatmap exists) with the
part's recall into an F1. The background is scored on the complements of mask
and heatmap, where precision needs no approximation.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .io import Heatmap, PartMaskSet

BACKGROUND = "Bg"

_JSONL_FIELDS = ("image_id", "category", "part", "ph", "recall", "precision_used", "part_pixels")


@dataclass(frozen=True, eq=False)
class BinaryMap:
    bits: np.ndarray  # bool grid, shape (height, width)

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]


@dataclass(frozen=True)
class PHRecord:
    image_id: str
    category: str
    part: str  # part name, or "Bg" for the background record
    ph: float
    recall: float
    precision_used: float
    part_pixels: int

    def to_json_line(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False)

    @classmethod
    def from_json_line(cls, line: str) -> "PHRecord":
        data = json.loads(line)
        return cls(**{name: data[name] for name in _JSONL_FIELDS})


def normalize_minmax(heatmap: Heatmap) -> Heatmap:
    """Rescale values to span [0, 1]; a constant grid collapses to all zeros."""
    values = heatmap.values
    lo = float(values.min())
    hi = float(values.max())
    if hi == lo:
        return Heatmap(values=np.zeros_like(values))
    return Heatmap(values=(values - lo) / (hi - lo))


def binarize(heatmap: Heatmap, theta: float = 0.5) -> BinaryMap:
    """Threshold a heatmap with a strict comparison: bit = 1 iff value > theta."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {theta}")
    return BinaryMap(bits=heatmap.values > theta)


def _check_dims(grid: np.ndarray, binary: BinaryMap) -> None:
    if grid.shape != binary.bits.shape:
        raise ValueError(f"dimension mismatch: mask {grid.shape} vs heatmap {binary.bits.shape}")


def approx_precision(foreground: np.ndarray, binary: BinaryMap) -> float:
    """Object-level precision TP / sum(H), used as every part's precision.

    Returns 0 when the binarized heatmap is empty (a heatmap highlighting
    nothing explains nothing).
    """
    _check_dims(foreground, binary)
    sum_h = int(np.count_nonzero(binary.bits))
    if sum_h == 0:
        return 0.0
    tp = int(np.count_nonzero(foreground & binary.bits))
    return tp / sum_h


def part_recall(part: np.ndarray, binary: BinaryMap) -> float:
    """Recall TP / sum(M^p) of one part; the part mask must be nonempty."""
    _check_dims(part, binary)
    part_pixels = int(np.count_nonzero(part))
    if part_pixels == 0:
        raise ValueError("empty part mask; callers must skip empty parts")
    tp = int(np.count_nonzero(part & binary.bits))
    return tp / part_pixels


def ph_score(precision: float, recall: float) -> float:
    """Harmonic combination 2PR/(P+R); 0 when both terms are 0."""
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _background_prf(foreground: np.ndarray, binary: BinaryMap) -> tuple[float, float, float, int]:
    """Exact precision, recall, F1, and pixel count on the complements."""
    _check_dims(foreground, binary)
    bg = ~foreground
    off = ~binary.bits
    tp = int(np.count_nonzero(bg & off))
    sum_off = int(np.count_nonzero(off))
    bg_pixels = int(np.count_nonzero(bg))
    precision = tp / sum_off if sum_off > 0 else 0.0
    recall = tp / bg_pixels if bg_pixels > 0 else 0.0
    return precision, recall, ph_score(precision, recall), bg_pixels


def background_ph(foreground: np.ndarray, binary: BinaryMap) -> float:
    """F1 on the complements 1-M and 1-H; both terms computed exactly."""
    return _background_prf(foreground, binary)[2]


def score_image(
    image_id: str,
    masks: PartMaskSet,
    heatmap: Heatmap,
    theta: float = 0.5,
    normalize: bool = True,
) -> list[PHRecord]:
    """Score every nonempty part plus the background of one image.

    The heatmap must already match the mask dimensions (resize first). Empty
    parts yield no record; the background record is skipped when the object
    fills the whole frame.
    """
    if (heatmap.height, heatmap.width) != (masks.height, masks.width):
        raise ValueError(
            f"dimension mismatch: heatmap {heatmap.width}x{heatmap.height} "
            f"vs masks {masks.width}x{masks.height}"
        )
    if normalize:
        heatmap = normalize_minmax(heatmap)
    binary = binarize(heatmap, theta)

    precision = approx_precision(masks.foreground, binary)
    records = []
    for name, grid in masks.parts.items():
        part_pixels = int(np.count_nonzero(grid))
        if part_pixels == 0:
            continue
        recall = part_recall(grid, binary)
        records.append(PHRecord(
            image_id=image_id,
            category=masks.category,
            part=name,
            ph=ph_score(precision, recall),
            recall=recall,
            precision_used=precision,
            part_pixels=part_pixels,
        ))

    bg_precision, bg_recall, bg_f1, bg_pixels = _background_prf(masks.foreground, binary)
    if bg_pixels > 0:
        records.append(PHRecord(
            image_id=image_id,
            category=masks.category,
            part=BACKGROUND,
            ph=bg_f1,
            recall=bg_recall,
            precision_used=bg_precision,
            part_pixels=bg_pixels,
        ))
    return records


def write_records(records, fh) -> int:
    """Append PHRecords to a JSON Lines stream; returns the record count."""
    count = 0
    for record in records:
        fh.write(record.to_json_line())
        fh.write("\n")
        count += 1
    return count


def read_records(fh):
    """Yield PHRecords from a JSON Lines stream, skipping blank lines."""
    for line in fh:
        line = line.strip()
        if line:
            yield PHRecord.from_json_line(line)
