"""Deterministic SVG boxplot rendering: one panel per category.

Output is plain SVG 1.1 assembled from string templates with fixed 2-decimal
coordinates, so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from xml.sax.saxutils import escape

from .aggregate import CategoryStats, GroupStats
from .metric import BACKGROUND

PALETTE = (
    "#4c72b0", "#dd8452", "#55a868", "#c44e52",
    "#8172b3", "#937860", "#da8bc3", "#8c8c8c",
)

_MARGIN_LEFT = 46.0
_MARGIN_RIGHT = 14.0
_MARGIN_TOP = 42.0
_MARGIN_BOTTOM = 64.0
_PLOT_HEIGHT = 260.0
_BOX_WIDTH = 16.0
_BOX_STRIDE = 22.0
_SLOT_PAD = 16.0


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _slug(name: str) -> str:
    cleaned = re.sub(r"[^A-Za-z0-9._-]+", "_", name).strip("_")
    return cleaned or "category"


def _part_order_key(part: str):
    return (part == BACKGROUND, part)


class _Svg:
    def __init__(self, width: float, height: float):
        self.lines = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{_fmt(width)}" height="{_fmt(height)}" '
            f'viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        ]

    def line(self, x1, y1, x2, y2, stroke, width="1.00"):
        self.lines.append(
            f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
            f'stroke="{stroke}" stroke-width="{width}"/>'
        )

    def rect(self, x, y, w, h, fill, stroke):
        self.lines.append(
            f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" height="{_fmt(h)}" '
            f'fill="{fill}" fill-opacity="0.55" stroke="{stroke}" stroke-width="1.00"/>'
        )

    def circle(self, cx, cy, r, color):
        self.lines.append(
            f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r)}" '
            f'fill="none" stroke="{color}" stroke-width="1.00"/>'
        )

    def text(self, x, y, content, size=11.0, anchor="middle", transform=None):
        tr = f' transform="{transform}"' if transform else ""
        self.lines.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-family="sans-serif" '
            f'font-size="{_fmt(size)}" text-anchor="{anchor}" fill="#333333"{tr}>'
            f"{escape(content)}</text>"
        )

    def render(self) -> str:
        return "\n".join(self.lines + ["</svg>", ""])


def _draw_box(svg: _Svg, g: GroupStats, cx: float, y_of, color: str) -> None:
    half = _BOX_WIDTH / 2.0
    cap = _BOX_WIDTH * 0.35
    y_q1, y_q2, y_q3 = y_of(g.q1), y_of(g.q2), y_of(g.q3)
    y_lo, y_hi = y_of(g.whisker_low), y_of(g.whisker_high)
    svg.line(cx, y_q3, cx, y_hi, color)
    svg.line(cx, y_q1, cx, y_lo, color)
    svg.line(cx - cap, y_hi, cx + cap, y_hi, color)
    svg.line(cx - cap, y_lo, cx + cap, y_lo, color)
    svg.rect(cx - half, y_q3, _BOX_WIDTH, max(y_q1 - y_q3, 0.0), color, color)
    svg.line(cx - half, y_q2, cx + half, y_q2, color, width="1.60")
    for v in g.outliers:
        svg.circle(cx, y_of(v), 2.0, color)


def _render_category(category: str, series, parts) -> str:
    n_series = len(series)
    slot = _SLOT_PAD + _BOX_STRIDE * n_series
    width = _MARGIN_LEFT + slot * len(parts) + _MARGIN_RIGHT
    height = _MARGIN_TOP + _PLOT_HEIGHT + _MARGIN_BOTTOM
    top = _MARGIN_TOP

    def y_of(v: float) -> float:
        return top + (1.0 - v) * _PLOT_HEIGHT

    svg = _Svg(width, height)
    svg.text(_MARGIN_LEFT, 20.0, category, size=14.0, anchor="start")

    # legend swatches after the title
    lx = _MARGIN_LEFT + 12.0 * len(category) + 30.0
    for i, (label, _) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        svg.rect(lx, 11.0, 10.0, 10.0, color, color)
        svg.text(lx + 14.0, 20.0, label, size=11.0, anchor="start")
        lx += 20.0 + 7.0 * len(label) + 16.0

    # y axis with quarter gridlines
    x_right = width - _MARGIN_RIGHT
    for i in range(5):
        v = i / 4.0
        y = y_of(v)
        svg.line(_MARGIN_LEFT, y, x_right, y, "#dddddd")
        svg.text(_MARGIN_LEFT - 6.0, y + 3.5, _fmt(v), size=10.0, anchor="end")
    svg.line(_MARGIN_LEFT, top, _MARGIN_LEFT, top + _PLOT_HEIGHT, "#333333")
    svg.line(_MARGIN_LEFT, top + _PLOT_HEIGHT, x_right, top + _PLOT_HEIGHT, "#333333")

    for pi, part in enumerate(parts):
        x0 = _MARGIN_LEFT + slot * pi + _SLOT_PAD / 2.0
        label_x = _MARGIN_LEFT + slot * pi + slot / 2.0
        label_y = top + _PLOT_HEIGHT + 16.0
        svg.text(
            label_x, label_y, part, size=11.0, anchor="end",
            transform=f"rotate(-35 {_fmt(label_x)} {_fmt(label_y)})",
        )
        for si, (_, groups) in enumerate(series):
            g = groups.get(part)
            if g is None:
                continue
            cx = x0 + _BOX_STRIDE * si + _BOX_STRIDE / 2.0
            _draw_box(svg, g, cx, y_of, PALETTE[si % len(PALETTE)])

    return svg.render()


def render_boxplots(series, out_dir: str | Path) -> dict[str, Path]:
    """Render grouped boxplots, one SVG per category, plus index.json.

    series: sequence of (label, CategoryStats) pairs; boxes for the same part
    are grouped side by side per series. Within a panel parts are ordered
    ascending with "Bg" last. Returns {category: svg path}.
    """
    series = list(series)
    if not any(stats.groups for _, stats in series):
        raise ValueError("nothing to plot: no groups in any series")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    by_category: dict[str, list[tuple[str, dict[str, GroupStats]]]] = {}
    for label, stats in series:
        for g in stats.groups:
            by_category.setdefault(g.category, [])
    for label, stats in series:
        lookup: dict[str, dict[str, GroupStats]] = {}
        for g in stats.groups:
            lookup.setdefault(g.category, {})[g.part] = g
        for category in by_category:
            by_category[category].append((label, lookup.get(category, {})))

    used_names: set[str] = set()
    files: dict[str, Path] = {}
    index = []
    for category in sorted(by_category):
        cat_series = by_category[category]
        parts = sorted(
            {part for _, groups in cat_series for part in groups},
            key=_part_order_key,
        )
        name = _slug(category)
        candidate = f"{name}.svg"
        counter = 2
        while candidate in used_names:
            candidate = f"{name}~{counter}.svg"
            counter += 1
        used_names.add(candidate)
        path = out_dir / candidate
        path.write_text(_render_category(category, cat_series, parts), encoding="utf-8")
        files[category] = path
        index.append({"category": category, "file": candidate})

    with open(out_dir / "index.json", "w", encoding="utf-8") as fh:
        json.dump({"boxplots": index}, fh, indent=2)
        fh.write("\n")
    return files
