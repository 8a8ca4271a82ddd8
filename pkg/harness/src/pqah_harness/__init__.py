"""Grad-CAM extraction harness producing pqah-compatible heatmap files."""

from .errors import HarnessError, ImageError, ModelError
from .extract import (
    ExtractionJob,
    ExtractionResult,
    FRAGMENT_NAME,
    HEATMAP_SUBDIR,
    MODEL_BUILDERS,
    extract_heatmaps,
    extract_one,
    load_model,
)
from .formats import (
    F32_MAGIC,
    FORMATS,
    heatmap_suffix,
    write_heatmap,
    write_heatmap_f32,
    write_heatmap_png16,
)
from .gradcam import CamResult, GradCam

__version__ = "0.1.0"

__all__ = [
    "CamResult",
    "ExtractionJob",
    "ExtractionResult",
    "F32_MAGIC",
    "FORMATS",
    "FRAGMENT_NAME",
    "GradCam",
    "HEATMAP_SUBDIR",
    "HarnessError",
    "ImageError",
    "MODEL_BUILDERS",
    "ModelError",
    "extract_heatmaps",
    "extract_one",
    "heatmap_suffix",
    "load_model",
    "write_heatmap",
    "write_heatmap_f32",
    "write_heatmap_png16",
    "__version__",
]
