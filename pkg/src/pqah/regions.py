"""Positional lung-region synthesis from a whole-lung binary mask.

The two largest 4-connected components are taken as the lungs; the one whose
bounding-box center sits further left in image coordinates is "left". Each
lung's bounding box is cut into top/middle/bottom bands at floor(h/3) and
floor(2h/3) of its height, yielding six parts: lt, lm, lb, rt, rm, rb.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import RegionError
from .io import write_indexed_png

REGION_NAMES = ("lt", "lm", "lb", "rt", "rm", "rb")

# image-coordinate convention: "left" = smaller column index, not patient side
LEFT_CONVENTION = "image-left"


@dataclass(frozen=True, eq=False)
class Component:
    mask: np.ndarray  # bool grid, full image size
    bbox: tuple[int, int, int, int]  # (row0, col0, row1, col1), half-open
    area: int

    @property
    def center_x(self) -> float:
        return (self.bbox[1] + self.bbox[3]) / 2.0


@dataclass(frozen=True, eq=False)
class RegionSplit:
    width: int
    height: int
    regions: dict[str, np.ndarray]  # REGION_NAMES order, bool grids


def connected_components(mask: np.ndarray) -> list[Component]:
    """4-connected components with tight bounding boxes, largest area first.

    Ties break on bounding-box position (top-left first) so ordering is
    deterministic.
    """
    mask = np.asarray(mask, dtype=bool)
    labeled, count = ndimage.label(mask)  # default structure = 4-connectivity
    components = []
    for index, sl in enumerate(ndimage.find_objects(labeled), start=1):
        if sl is None:
            continue
        component = labeled == index
        bbox = (sl[0].start, sl[1].start, sl[0].stop, sl[1].stop)
        components.append(Component(
            mask=component,
            bbox=bbox,
            area=int(np.count_nonzero(component)),
        ))
    components.sort(key=lambda c: (-c.area, c.bbox))
    return components


def _bands(row0: int, row1: int) -> tuple[tuple[int, int], tuple[int, int], tuple[int, int]]:
    h = row1 - row0
    first = row0 + h // 3
    second = row0 + (2 * h) // 3
    return (row0, first), (first, second), (second, row1)


def split_lung_mask(mask: np.ndarray) -> RegionSplit:
    """Split a whole-lung mask into the six positional regions.

    Requires at least two connected components; extra specks beyond the two
    largest are dropped.
    """
    mask = np.asarray(mask, dtype=bool)
    components = connected_components(mask)
    if len(components) < 2:
        raise RegionError(
            f"expected two lung components, found {len(components)}"
        )
    first, second = components[0], components[1]
    if first.center_x <= second.center_x:
        left, right = first, second
    else:
        left, right = second, first

    height, width = mask.shape
    regions: dict[str, np.ndarray] = {}
    for side_prefix, component in (("l", left), ("r", right)):
        row0, _, row1, _ = component.bbox
        for band_suffix, (b0, b1) in zip("tmb", _bands(row0, row1)):
            band = np.zeros_like(mask)
            band[b0:b1, :] = component.mask[b0:b1, :]
            regions[side_prefix + band_suffix] = band
    regions = {name: regions[name] for name in REGION_NAMES}
    return RegionSplit(width=width, height=height, regions=regions)


def region_label_map() -> dict[int, str]:
    return {i + 1: name for i, name in enumerate(REGION_NAMES)}


def write_region_split(split: RegionSplit, out_dir: str | Path, stem: str) -> tuple[Path, Path]:
    """Write the split as an indexed PNG plus a manifest label_map fragment."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    indices = np.zeros((split.height, split.width), dtype=np.uint8)
    for value, name in region_label_map().items():
        indices[split.regions[name]] = value
    mask_path = out_dir / f"{stem}_parts.png"
    write_indexed_png(mask_path, indices)

    fragment_path = out_dir / f"{stem}_label_map.json"
    fragment = {
        "label_map": {str(v): name for v, name in region_label_map().items()},
        "left_convention": LEFT_CONVENTION,
    }
    with open(fragment_path, "w", encoding="utf-8") as fh:
        json.dump(fragment, fh, indent=2)
        fh.write("\n")
    return mask_path, fragment_path
