"""Tests for deterministic SVG boxplot rendering."""

import json
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from pqah.aggregate import CategoryStats, GroupStats
from pqah.boxplot import PALETTE, render_boxplots
from pqah.metric import BACKGROUND

GOLDEN = Path(__file__).parent / "golden"

_SVG_NS = "{http://www.w3.org/2000/svg}"


def _group(category, part, q1, q2, q3, wlo=None, whi=None, outliers=(), n=10):
    return GroupStats(category=category, part=part, q1=q1, q2=q2, q3=q3,
                      whisker_low=q1 if wlo is None else wlo,
                      whisker_high=q3 if whi is None else whi,
                      outliers=tuple(outliers), n=n)


def golden_series():
    """Fixed stats used for the golden-file comparison."""
    stats = CategoryStats(groups=(
        _group("fish", "fin", 0.30, 0.45, 0.60, wlo=0.10, whi=0.80),
        _group("fish", "tail", 0.55, 0.70, 0.80, wlo=0.40, whi=0.95,
               outliers=(0.05, 0.12)),
        _group("fish", BACKGROUND, 0.70, 0.80, 0.90, wlo=0.50, whi=1.00),
    ))
    return [("demo", stats)]


def _elements(path, tag):
    root = ET.parse(path).getroot()
    return root.findall(f".//{_SVG_NS}{tag}")


class TestRender:
    def test_golden_file(self, tmp_path):
        files = render_boxplots(golden_series(), tmp_path)
        got = files["fish"].read_bytes()
        want = (GOLDEN / "fish.svg").read_bytes()
        assert got == want

    def test_byte_identical_across_runs(self, tmp_path):
        first = render_boxplots(golden_series(), tmp_path / "a")
        second = render_boxplots(golden_series(), tmp_path / "b")
        assert first["fish"].read_bytes() == second["fish"].read_bytes()

    def test_one_category_two_parts_box_count(self, tmp_path):
        stats = CategoryStats(groups=(
            _group("cat", "ear", 0.2, 0.3, 0.4),
            _group("cat", "paw", 0.5, 0.6, 0.7),
        ))
        files = render_boxplots([("m", stats)], tmp_path)
        boxes = [r for r in _elements(files["cat"], "rect")
                 if r.get("fill") == PALETTE[0]]
        # one legend swatch plus one box per part
        assert len(boxes) == 3

    def test_two_series_grouped(self, tmp_path):
        stats_a = CategoryStats(groups=(
            _group("cat", "ear", 0.2, 0.3, 0.4),
            _group("cat", "paw", 0.5, 0.6, 0.7),
        ))
        stats_b = CategoryStats(groups=(
            _group("cat", "ear", 0.3, 0.4, 0.5),
        ))
        files = render_boxplots([("resnet50", stats_a), ("vgg16", stats_b)], tmp_path)
        rects = _elements(files["cat"], "rect")
        first = [r for r in rects if r.get("fill") == PALETTE[0]]
        second = [r for r in rects if r.get("fill") == PALETTE[1]]
        assert len(first) == 3   # legend swatch + 2 boxes
        assert len(second) == 2  # legend swatch + 1 box (no "paw" group)
        texts = [t.text for t in _elements(files["cat"], "text")]
        assert "resnet50" in texts and "vgg16" in texts

    def test_outlier_dots(self, tmp_path):
        plain = CategoryStats(groups=(_group("c", "p", 0.2, 0.3, 0.4),))
        dotted = CategoryStats(groups=(
            _group("c", "p", 0.2, 0.3, 0.4, outliers=(0.9, 0.95)),))
        files = render_boxplots([("m", plain)], tmp_path / "plain")
        assert _elements(files["c"], "circle") == []
        files = render_boxplots([("m", dotted)], tmp_path / "dotted")
        assert len(_elements(files["c"], "circle")) == 2

    def test_index_json(self, tmp_path):
        stats = CategoryStats(groups=(
            _group("bird", "wing", 0.2, 0.3, 0.4),
            _group("cat", "paw", 0.5, 0.6, 0.7),
        ))
        render_boxplots([("m", stats)], tmp_path)
        index = json.loads((tmp_path / "index.json").read_text(encoding="utf-8"))
        assert index == {"boxplots": [
            {"category": "bird", "file": "bird.svg"},
            {"category": "cat", "file": "cat.svg"},
        ]}

    def test_slug_collision(self, tmp_path):
        stats = CategoryStats(groups=(
            _group("a/b", "p", 0.2, 0.3, 0.4),
            _group("a b", "p", 0.2, 0.3, 0.4),
        ))
        files = render_boxplots([("m", stats)], tmp_path)
        names = sorted(p.name for p in files.values())
        assert names == ["a_b.svg", "a_b~2.svg"]

    def test_nothing_to_plot(self, tmp_path):
        with pytest.raises(ValueError, match="nothing to plot"):
            render_boxplots([("m", CategoryStats(groups=()))], tmp_path)

    def test_valid_xml_and_version(self, tmp_path):
        files = render_boxplots(golden_series(), tmp_path)
        root = ET.parse(files["fish"]).getroot()
        assert root.get("version") == "1.1"
