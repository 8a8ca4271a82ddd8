"""Command line interface for Grad-CAM heatmap extraction.

Exit codes mirror the downstream pqah tool: 0 on success, 1 when the run
produced nothing usable, 2 for configuration problems, 3 when some images
were skipped.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import HarnessError, ImageError, ModelError
from .extract import ExtractionJob, MODEL_BUILDERS, extract_heatmaps
from .formats import FORMATS

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_PARTIAL = 3

log = logging.getLogger("pqah_harness")


def _load_targets(path: Path) -> dict[str, int]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, ValueError) as exc:
        raise ImageError(f"cannot read targets file {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ImageError("targets file must hold an object of stem -> class index")
    targets: dict[str, int] = {}
    for key, value in raw.items():
        if not isinstance(value, int) or isinstance(value, bool):
            raise ImageError(f"target class for {key!r} must be an integer")
        targets[str(key)] = value
    return targets


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pqah-extract",
        description="Extract Grad-CAM heatmaps from an image classifier "
        "in pqah heatmap formats.",
    )
    parser.add_argument(
        "--model", required=True, choices=sorted(MODEL_BUILDERS),
        help="classifier architecture",
    )
    parser.add_argument(
        "--images", required=True, type=Path, help="directory of input images"
    )
    parser.add_argument(
        "--out", required=True, type=Path,
        help="output directory for heatmaps and manifest fragment",
    )
    parser.add_argument(
        "--format", choices=FORMATS, default="png16", help="heatmap file format"
    )
    parser.add_argument(
        "--weights", type=Path, default=None,
        help="local state dict to load instead of the published weights",
    )
    parser.add_argument(
        "--random-init", action="store_true",
        help="use seeded random weights (pipeline testing without downloads)",
    )
    parser.add_argument(
        "--seed", type=int, default=0, help="seed for model construction"
    )
    parser.add_argument(
        "--targets", type=Path, default=None,
        help="JSON object mapping image stem to target class index",
    )
    parser.add_argument(
        "--multi-scale", action="store_true",
        help="average maps from inputs at several scales",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        targets = None if args.targets is None else _load_targets(args.targets)
        job = ExtractionJob(
            model=args.model,
            images_dir=args.images,
            out_dir=args.out,
            fmt=args.format,
            weights=args.weights,
            random_init=args.random_init,
            seed=args.seed,
            targets=targets,
            multi_scale=args.multi_scale,
        )
        result = extract_heatmaps(job)
    except (ModelError, ImageError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except HarnessError as exc:
        log.error("%s", exc)
        return EXIT_FAILURE
    done = len(result.entries)
    skipped = len(result.failures)
    log.info("extracted %d heatmap(s), skipped %d", done, skipped)
    if done == 0:
        log.error("no heatmaps were produced")
        return EXIT_FAILURE
    if skipped:
        return EXIT_PARTIAL
    return EXIT_OK


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
