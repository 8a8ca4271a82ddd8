"""Batch Grad-CAM extraction over an image directory.

For every readable image the harness runs one forward/backward pass through
a torchvision classifier, builds the Grad-CAM map of the target class
(top-1 prediction unless overridden per image), upsamples it to the original
image size, min-max normalizes it, and writes it in one of the pqah heatmap
formats. A ``manifest_fragment.json`` listing the emitted heatmaps is written
alongside them; merging in mask paths and label maps yields a full pqah
manifest.

Normalization happens after the upsample so the emitted map of a
non-constant CAM always contains an exact 1.0 at its peak; bilinear
resampling of an already normalized map would shave the maximum whenever the
peak falls between target pixel centers.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
from PIL import Image
from torchvision import models
from torchvision.transforms import functional as TF

from .errors import ImageError, ModelError
from .formats import FORMATS, heatmap_suffix, write_heatmap
from .gradcam import GradCam

log = logging.getLogger("pqah_harness")

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp")
INPUT_SIDE = 224
MULTI_SCALE_FACTORS = (1.0, 2.0)

_IMAGENET_MEAN = (0.485, 0.456, 0.406)
_IMAGENET_STD = (0.229, 0.224, 0.225)

FRAGMENT_NAME = "manifest_fragment.json"
HEATMAP_SUBDIR = "heatmaps"


def _vgg_last_relu(model: torch.nn.Module) -> torch.nn.Module:
    idx = max(
        i for i, layer in enumerate(model.features) if isinstance(layer, torch.nn.ReLU)
    )
    return model.features[idx]


MODEL_BUILDERS = {
    "resnet50": (models.resnet50, lambda m: m.layer4),
    "vgg16": (models.vgg16, _vgg_last_relu),
}


@dataclass(frozen=True)
class ExtractionJob:
    """Configuration for one extraction run.

    model: architecture name, a key of ``MODEL_BUILDERS``.
    images_dir: directory scanned (non-recursively) for images.
    out_dir: destination for heatmaps and the manifest fragment.
    fmt: heatmap encoding, ``png16`` or ``f32``.
    weights: path to a local state dict; mutually exclusive with random_init.
    random_init: use seeded random weights instead of pretrained ones.
    seed: RNG seed applied before model construction.
    targets: optional per-image target class, keyed by image stem.
    multi_scale: average CAMs from inputs at several scales.
    """

    model: str
    images_dir: Path
    out_dir: Path
    fmt: str = "png16"
    weights: Path | None = None
    random_init: bool = False
    seed: int = 0
    targets: dict[str, int] | None = None
    multi_scale: bool = False


@dataclass
class ExtractionResult:
    """Outcome of an extraction run."""

    entries: list[dict] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)
    fragment_path: Path | None = None


def load_model(job: ExtractionJob) -> GradCam:
    """Build the classifier named by the job and wrap it for Grad-CAM."""
    if job.model not in MODEL_BUILDERS:
        known = ", ".join(sorted(MODEL_BUILDERS))
        raise ModelError(f"unknown model {job.model!r} (known: {known})")
    if job.weights is not None and job.random_init:
        raise ModelError("weights path and random init are mutually exclusive")
    builder, pick_layer = MODEL_BUILDERS[job.model]
    torch.manual_seed(job.seed)
    try:
        if job.weights is not None:
            model = builder(weights=None)
            state = torch.load(job.weights, map_location="cpu", weights_only=True)
            model.load_state_dict(state)
        elif job.random_init:
            model = builder(weights=None)
        else:
            model = builder(weights="DEFAULT")
    except ModelError:
        raise
    except Exception as exc:
        raise ModelError(f"failed to load model {job.model!r}: {exc}") from exc
    model.eval()
    for param in model.parameters():
        param.requires_grad_(True)
    return GradCam(model, pick_layer(model))


def _list_images(images_dir: Path) -> list[Path]:
    if not images_dir.is_dir():
        raise ImageError(f"image directory not found: {images_dir}")
    return sorted(
        p for p in images_dir.iterdir()
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    )


def _load_rgb(path: Path) -> Image.Image:
    try:
        with Image.open(path) as img:
            return img.convert("RGB")
    except Exception as exc:
        raise ImageError(f"cannot read image {path.name}: {exc}") from exc


def _preprocess(image: Image.Image, side: int) -> torch.Tensor:
    resized = image.resize((side, side), resample=Image.Resampling.BILINEAR)
    tensor = TF.to_tensor(resized)
    tensor = TF.normalize(tensor, list(_IMAGENET_MEAN), list(_IMAGENET_STD))
    return tensor.unsqueeze(0)


def _upsample(cam: torch.Tensor, height: int, width: int) -> torch.Tensor:
    return F.interpolate(
        cam[None, None], size=(height, width), mode="bilinear", align_corners=False
    )[0, 0]


def _minmax(values: np.ndarray) -> np.ndarray:
    lo = float(values.min())
    hi = float(values.max())
    if hi <= lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def extract_one(
    cam_model: GradCam,
    image: Image.Image,
    target_class: int | None = None,
    multi_scale: bool = False,
) -> tuple[np.ndarray, int, int]:
    """Return (normalized heatmap at image size, target class, predicted class).

    The target class is resolved once at the base scale so every scale of a
    multi-scale run explains the same decision.
    """
    width, height = image.size
    scales = MULTI_SCALE_FACTORS if multi_scale else (1.0,)
    total = torch.zeros((height, width), dtype=torch.float64)
    target = target_class
    predicted = None
    for scale in scales:
        side = max(int(round(INPUT_SIDE * scale)), 1)
        batch = _preprocess(image, side)
        result = cam_model.compute(batch, target)
        if predicted is None:
            predicted = result.predicted_class
            target = result.target_class
        total += _upsample(result.cam, height, width).to(torch.float64)
    heat = _minmax((total / len(scales)).numpy())
    return heat, int(target), int(predicted)


def extract_heatmaps(job: ExtractionJob) -> ExtractionResult:
    """Run the extraction job and write heatmaps plus a manifest fragment.

    Unreadable images are skipped with a warning and reported in
    ``failures``; model problems raise :class:`ModelError`.
    """
    if job.fmt not in FORMATS:
        raise ValueError(f"unknown heatmap format: {job.fmt!r}")
    paths = _list_images(Path(job.images_dir))
    cam_model = load_model(job)
    out_dir = Path(job.out_dir)
    heat_dir = out_dir / HEATMAP_SUBDIR
    heat_dir.mkdir(parents=True, exist_ok=True)
    suffix = heatmap_suffix(job.fmt)
    result = ExtractionResult()
    for path in paths:
        stem = path.stem
        target = None if job.targets is None else job.targets.get(stem)
        try:
            image = _load_rgb(path)
            heat, target_class, predicted = extract_one(
                cam_model, image, target, job.multi_scale
            )
        except (ImageError, ValueError) as exc:
            log.warning("image %s: %s; skipped", stem, exc)
            result.failures.append(stem)
            continue
        heat_path = heat_dir / (stem + suffix)
        write_heatmap(heat_path, heat, job.fmt)
        result.entries.append(
            {
                "id": stem,
                "heatmap_path": str(heat_path.relative_to(out_dir)),
                "target_class": target_class,
                "predicted_class": predicted,
            }
        )
    fragment = {
        "model": job.model,
        "format": job.fmt,
        "entries": result.entries,
    }
    fragment_path = out_dir / FRAGMENT_NAME
    with open(fragment_path, "w", encoding="utf-8") as fh:
        json.dump(fragment, fh, indent=2)
        fh.write("\n")
    result.fragment_path = fragment_path
    return result
