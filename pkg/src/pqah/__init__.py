"""Part-based quantitative analysis for heatmaps.

Scores how well saliency heatmaps cover the semantic parts of objects,
aggregates the scores into quartile statistics, renders deterministic
boxplot SVGs, splits lung masks into six regions, and packages the
statistics into an LLM-ready report prompt.
"""

from .aggregate import (
    CategoryStats,
    GroupStats,
    SummaryRow,
    aggregate_scores,
    dataset_summary,
    quantile,
    read_stats,
    write_stats,
    write_summary_csv,
)
from .boxplot import render_boxplots
from .errors import (
    HeatmapError,
    ManifestError,
    MaskError,
    PqahError,
    RegionError,
    ReportConfigError,
    ReportError,
    ReportProtocolError,
    ReportTimeoutError,
    ReportTransportError,
    StatsError,
)
from .io import (
    Heatmap,
    ImageEntry,
    Manifest,
    PartMaskSet,
    encode_part_masks,
    load_heatmap,
    load_manifest,
    load_part_masks,
    read_indexed_mask,
    resize_bilinear,
    write_f32_grid,
    write_heatmap_png,
    write_indexed_png,
    write_manifest,
)
from .metric import (
    BACKGROUND,
    PHRecord,
    approx_precision,
    background_ph,
    binarize,
    normalize_minmax,
    part_recall,
    ph_score,
    read_records,
    score_image,
    write_records,
)
from .regions import (
    REGION_NAMES,
    RegionSplit,
    connected_components,
    region_label_map,
    split_lung_mask,
    write_region_split,
)
from .report import (
    DEFAULT_PROMPT_TEMPLATE,
    DEFAULT_TOKEN_ENV,
    build_prompt,
    build_report_payload,
    render_payload_json,
    request_report,
)

__version__ = "0.1.0"

__all__ = [
    "BACKGROUND",
    "CategoryStats",
    "DEFAULT_PROMPT_TEMPLATE",
    "DEFAULT_TOKEN_ENV",
    "GroupStats",
    "Heatmap",
    "HeatmapError",
    "ImageEntry",
    "Manifest",
    "ManifestError",
    "MaskError",
    "PHRecord",
    "PartMaskSet",
    "PqahError",
    "REGION_NAMES",
    "RegionError",
    "RegionSplit",
    "ReportConfigError",
    "ReportError",
    "ReportProtocolError",
    "ReportTimeoutError",
    "ReportTransportError",
    "StatsError",
    "SummaryRow",
    "aggregate_scores",
    "approx_precision",
    "background_ph",
    "binarize",
    "build_prompt",
    "build_report_payload",
    "connected_components",
    "dataset_summary",
    "encode_part_masks",
    "load_heatmap",
    "load_manifest",
    "load_part_masks",
    "normalize_minmax",
    "part_recall",
    "ph_score",
    "quantile",
    "read_indexed_mask",
    "read_records",
    "read_stats",
    "region_label_map",
    "render_boxplots",
    "render_payload_json",
    "request_report",
    "resize_bilinear",
    "score_image",
    "split_lung_mask",
    "write_f32_grid",
    "write_heatmap_png",
    "write_indexed_png",
    "write_manifest",
    "write_records",
    "write_region_split",
    "write_stats",
    "write_summary_csv",
]
