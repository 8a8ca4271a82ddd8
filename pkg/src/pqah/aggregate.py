"""Grouping and quartile statistics over score records.

Records are grouped by (category, part). Each group gets Q1/Q2/Q3 (linear
interpolation at rank (n-1)*q), Tukey whiskers (most extreme points within
1.5*IQR of the box, clamped to the box edges), and the values beyond the
whiskers as outliers.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import StatsError
from .metric import BACKGROUND, PHRecord


@dataclass(frozen=True)
class GroupStats:
    category: str
    part: str
    q1: float
    q2: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: tuple[float, ...]  # sorted ascending
    n: int


@dataclass(frozen=True)
class CategoryStats:
    groups: tuple[GroupStats, ...]  # category asc, then part asc with "Bg" last

    def __bool__(self) -> bool:
        return bool(self.groups)


@dataclass(frozen=True)
class SummaryRow:
    label: str
    mean_q1: float
    mean_q2: float
    mean_q3: float


def quantile(values, q: float) -> float:
    """Linear-interpolation quantile of an already-sorted nonempty sequence."""
    if not values:
        raise ValueError("quantile of empty sequence")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must be in [0, 1], got {q}")
    rank = (len(values) - 1) * q
    lower = math.floor(rank)
    frac = rank - lower
    if frac == 0.0:
        return float(values[lower])
    return float(values[lower] + frac * (values[lower + 1] - values[lower]))


def _group_key(category: str, part: str):
    # "Bg" sorts after every real part within its category
    return (category, part == BACKGROUND, part)


def make_group_stats(category: str, part: str, values) -> GroupStats:
    """Quartiles, whiskers, and outliers for one (category, part) group."""
    ordered = sorted(values)
    q1 = quantile(ordered, 0.25)
    q2 = quantile(ordered, 0.50)
    q3 = quantile(ordered, 0.75)
    reach = 1.5 * (q3 - q1)
    in_low = [v for v in ordered if v >= q1 - reach]
    in_high = [v for v in ordered if v <= q3 + reach]
    whisker_low = min(in_low[0], q1) if in_low else q1
    whisker_high = max(in_high[-1], q3) if in_high else q3
    outliers = tuple(v for v in ordered if v < q1 - reach or v > q3 + reach)
    return GroupStats(
        category=category,
        part=part,
        q1=q1,
        q2=q2,
        q3=q3,
        whisker_low=whisker_low,
        whisker_high=whisker_high,
        outliers=outliers,
        n=len(ordered),
    )


def aggregate_scores(records) -> CategoryStats:
    """Group a record stream by (category, part) and compute group stats.

    Output ordering is canonical (category ascending, parts ascending with
    "Bg" last), so any permutation of the input yields identical stats.
    """
    buckets: dict[tuple[str, str], list[float]] = {}
    for record in records:
        buckets.setdefault((record.category, record.part), []).append(record.ph)
    groups = tuple(
        make_group_stats(category, part, values)
        for (category, part), values in sorted(
            buckets.items(), key=lambda item: _group_key(*item[0])
        )
    )
    return CategoryStats(groups=groups)


def dataset_summary(stats: CategoryStats, include_bg: bool = False, label: str = "") -> SummaryRow:
    """Mean of each quartile over all (category, part) cells.

    Background cells are excluded unless include_bg is set; they describe the
    object/background separation, not a real part.
    """
    cells = [g for g in stats.groups if include_bg or g.part != BACKGROUND]
    if not cells:
        raise StatsError("no stats cells to summarize")
    n = len(cells)
    return SummaryRow(
        label=label,
        mean_q1=sum(g.q1 for g in cells) / n,
        mean_q2=sum(g.q2 for g in cells) / n,
        mean_q3=sum(g.q3 for g in cells) / n,
    )


def write_stats(stats: CategoryStats, path: str | Path) -> None:
    data = {
        "groups": [
            {
                "category": g.category,
                "part": g.part,
                "q1": g.q1,
                "q2": g.q2,
                "q3": g.q3,
                "whisker_low": g.whisker_low,
                "whisker_high": g.whisker_high,
                "outliers": list(g.outliers),
                "n": g.n,
            }
            for g in stats.groups
        ]
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def read_stats(path: str | Path) -> CategoryStats:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        groups = tuple(
            GroupStats(
                category=g["category"],
                part=g["part"],
                q1=float(g["q1"]),
                q2=float(g["q2"]),
                q3=float(g["q3"]),
                whisker_low=float(g["whisker_low"]),
                whisker_high=float(g["whisker_high"]),
                outliers=tuple(float(v) for v in g["outliers"]),
                n=int(g["n"]),
            )
            for g in data["groups"]
        )
    except OSError as exc:
        raise StatsError(f"cannot read stats {path}: {exc}") from exc
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise StatsError(f"stats file {path} is malformed: {exc}") from exc
    return CategoryStats(groups=groups)


def write_summary_csv(rows, path: str | Path) -> None:
    """Write summary rows as CSV with header label,mean_q1,mean_q2,mean_q3."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "mean_q1", "mean_q2", "mean_q3"])
        for row in rows:
            writer.writerow([row.label, repr(row.mean_q1), repr(row.mean_q2), repr(row.mean_q3)])
