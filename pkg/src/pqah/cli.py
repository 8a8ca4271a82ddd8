"""Command-line pipeline: score, aggregate, summarize, plot, split lungs, report.

Exit codes: 0 ok, 1 total failure, 2 bad config, 3 partial failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import aggregate as agg
from . import report as rep
from .boxplot import render_boxplots
from .errors import (
    HeatmapError,
    ManifestError,
    MaskError,
    PqahError,
    ReportConfigError,
    StatsError,
)
from .io import load_heatmap, load_manifest, load_part_masks, read_indexed_mask, resize_bilinear
from .metric import normalize_minmax, read_records, score_image, write_records
from .regions import split_lung_mask, write_region_split

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_PARTIAL = 3

log = logging.getLogger("pqah")


def _score_entry(manifest, entry, theta, normalize):
    masks = load_part_masks(entry, manifest.root)
    heatmap = load_heatmap(manifest.resolve(entry.heatmap_path))
    if normalize:
        heatmap = normalize_minmax(heatmap)
    if (heatmap.width, heatmap.height) != (masks.width, masks.height):
        heatmap = resize_bilinear(heatmap, masks.width, masks.height)
    return score_image(entry.id, masks, heatmap, theta=theta, normalize=False)


def cmd_run(args) -> int:
    if not 0.0 <= args.threshold <= 1.0:
        raise ValueError(f"--threshold must be in [0, 1], got {args.threshold}")
    workers = args.workers if args.workers else (os.cpu_count() or 1)
    if workers < 1:
        raise ValueError(f"--workers must be >= 1, got {args.workers}")
    manifest = load_manifest(args.manifest)
    normalize = not args.no_normalize

    failed = 0
    written = 0
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_score_entry, manifest, entry, args.threshold, normalize)
            for entry in manifest.entries
        ]
        with open(args.out, "w", encoding="utf-8") as fh:
            # results are consumed in manifest order, so output is
            # byte-identical regardless of worker count
            for entry, future in zip(manifest.entries, futures):
                try:
                    records = future.result()
                except PqahError as exc:
                    log.warning("image %s: %s; skipped", entry.id, exc)
                    failed += 1
                    continue
                written += write_records(records, fh)

    log.info("scored %d/%d images, %d records -> %s",
             len(manifest.entries) - failed, len(manifest.entries), written, args.out)
    if failed and failed == len(manifest.entries):
        return EXIT_FAILURE
    if failed:
        return EXIT_PARTIAL
    return EXIT_OK


def _read_scores(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return list(read_records(fh))
    except OSError as exc:
        raise StatsError(f"cannot read scores {path}: {exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise StatsError(f"scores file {path} is malformed: {exc}") from exc


def cmd_aggregate(args) -> int:
    records = _read_scores(args.scores)
    stats = agg.aggregate_scores(records)
    agg.write_stats(stats, args.out)
    log.info("aggregated %d records into %d groups -> %s", len(records), len(stats.groups), args.out)
    return EXIT_OK


def cmd_summary(args) -> int:
    stats = agg.read_stats(args.stats)
    label = args.label if args.label else Path(args.stats).stem
    row = agg.dataset_summary(stats, include_bg=args.include_bg, label=label)
    agg.write_summary_csv([row], args.out)
    log.info("summary for %r -> %s", label, args.out)
    return EXIT_OK


def cmd_plot(args) -> int:
    labels = args.series or []
    if labels and len(labels) != len(args.stats):
        raise ValueError("--series must be given once per --stats")
    if not labels:
        labels = [Path(p).stem for p in args.stats]
    series = [(label, agg.read_stats(path)) for label, path in zip(labels, args.stats)]
    files = render_boxplots(series, args.out_dir)
    log.info("wrote %d boxplot panel(s) to %s", len(files), args.out_dir)
    return EXIT_OK


def cmd_split_lung(args) -> int:
    mask = read_indexed_mask(args.mask) > 0
    split = split_lung_mask(mask)
    stem = Path(args.mask).stem
    mask_path, fragment_path = write_region_split(split, args.out_dir, stem)
    log.info("wrote %s and %s", mask_path, fragment_path)
    return EXIT_OK


def cmd_report(args) -> int:
    stats = agg.read_stats(args.stats)
    payload = rep.build_report_payload(stats, precision_digits=args.digits)
    if args.prompt_template:
        try:
            template = Path(args.prompt_template).read_text(encoding="utf-8")
        except OSError as exc:
            raise ReportConfigError(f"cannot read prompt template: {exc}") from exc
    else:
        template = rep.DEFAULT_PROMPT_TEMPLATE
    prompt = rep.build_prompt(payload, template)

    did_something = False
    if args.payload_out:
        Path(args.payload_out).write_text(rep.render_payload_json(payload) + "\n", encoding="utf-8")
        log.info("payload -> %s", args.payload_out)
        did_something = True
    if args.prompt_out:
        Path(args.prompt_out).write_text(prompt, encoding="utf-8")
        log.info("prompt -> %s", args.prompt_out)
        did_something = True
    if args.llm_endpoint:
        if not args.llm_model:
            raise ReportConfigError("--llm-model is required with --llm-endpoint")
        if not args.out:
            raise ReportConfigError("--out is required with --llm-endpoint")
        text = rep.request_report(
            prompt,
            endpoint=args.llm_endpoint,
            model=args.llm_model,
            token_env=args.llm_token_env,
            timeout=args.timeout,
        )
        Path(args.out).write_text(text, encoding="utf-8")
        log.info("report -> %s", args.out)
        did_something = True
    if not did_something:
        raise ReportConfigError(
            "nothing to do: pass --llm-endpoint, --payload-out, or --prompt-out"
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pqah",
        description="Quantify how well heatmaps cover the semantic parts of objects.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="score every image in a manifest")
    run.add_argument("--manifest", required=True, help="manifest JSON path")
    run.add_argument("--threshold", type=float, default=0.5, help="binarization threshold (default 0.5)")
    run.add_argument("--no-normalize", action="store_true", help="skip min-max normalization")
    run.add_argument("--workers", type=int, default=0, help="worker count (default: logical CPUs)")
    run.add_argument("--out", required=True, help="scores JSONL output path")
    run.set_defaults(func=cmd_run)

    ag = sub.add_parser("aggregate", help="group scores into quartile stats")
    ag.add_argument("--scores", required=True, help="scores JSONL path")
    ag.add_argument("--out", required=True, help="stats JSON output path")
    ag.set_defaults(func=cmd_aggregate)

    summary = sub.add_parser("summary", help="average quartiles over all groups")
    summary.add_argument("--stats", required=True, help="stats JSON path")
    summary.add_argument("--out", required=True, help="summary CSV output path")
    summary.add_argument("--include-bg", action="store_true", help="include Bg cells in the means")
    summary.add_argument("--label", default="", help="row label (default: stats file stem)")
    summary.set_defaults(func=cmd_summary)

    plot = sub.add_parser("plot", help="render boxplot SVGs per category")
    plot.add_argument("--stats", action="append", required=True, help="stats JSON path (repeatable)")
    plot.add_argument("--series", action="append", help="series label, one per --stats")
    plot.add_argument("--out-dir", required=True, help="output directory for SVGs")
    plot.set_defaults(func=cmd_plot)

    split = sub.add_parser("split-lung", help="split a whole-lung mask into six regions")
    split.add_argument("--mask", required=True, help="binary lung mask PNG")
    split.add_argument("--out-dir", required=True, help="output directory")
    split.set_defaults(func=cmd_split_lung)

    report = sub.add_parser("report", help="build the LLM payload/prompt and fetch a report")
    report.add_argument("--stats", required=True, help="stats JSON path")
    report.add_argument("--out", help="report output file")
    report.add_argument("--digits", type=int, default=2, help="payload rounding digits (default 2)")
    report.add_argument("--llm-endpoint", help="chat-completions endpoint URL")
    report.add_argument("--llm-model", help="model id sent to the endpoint")
    report.add_argument("--llm-token-env", default=rep.DEFAULT_TOKEN_ENV,
                        help=f"env var holding the bearer token (default {rep.DEFAULT_TOKEN_ENV})")
    report.add_argument("--prompt-template", help="file with a custom template ({payload} placeholder)")
    report.add_argument("--payload-out", help="also write the payload JSON here")
    report.add_argument("--prompt-out", help="also write the rendered prompt here")
    report.add_argument("--timeout", type=float, default=120.0, help="request timeout in seconds")
    report.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s %(message)s", stream=sys.stderr
    )
    try:
        return args.func(args)
    except (ManifestError, StatsError, MaskError, HeatmapError, ReportConfigError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except PqahError as exc:
        log.error("%s", exc)
        return EXIT_FAILURE


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
