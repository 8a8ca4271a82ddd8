"""Shared fixtures: synthetic scenes, on-disk manifests, a stub LLM server."""

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from pqah.io import (
    Heatmap,
    ImageEntry,
    Manifest,
    PartMaskSet,
    write_heatmap_png,
    write_indexed_png,
    write_manifest,
)

# collected by test_acceptance.py, printed by pytest_terminal_summary below
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_worked_scene():
    """The 4x4 two-part scene: p1 top-left 2x2, p2 bottom-right 2x2, heat on
    the left half. Known scores: p1 2/3, p2 0, Bg 0.5 at theta 0.5."""
    p1 = np.zeros((4, 4), dtype=bool)
    p1[:2, :2] = True
    p2 = np.zeros((4, 4), dtype=bool)
    p2[2:, 2:] = True
    masks = PartMaskSet(width=4, height=4, category="toy",
                        parts={"p1": p1, "p2": p2}, foreground=p1 | p2)
    heat = np.zeros((4, 4))
    heat[:, :2] = 1.0
    return masks, Heatmap(values=heat)


def random_parts(rng, max_side=8, max_parts=4, category="c", keep_background=False):
    """Random PartMaskSet with 1..max_parts labels; some parts may be empty."""
    h = int(rng.integers(1, max_side + 1))
    w = int(rng.integers(1, max_side + 1))
    k = int(rng.integers(1, max_parts + 1))
    labels = rng.integers(0, k + 1, size=(h, w))
    if keep_background and not (labels == 0).any():
        labels.flat[int(rng.integers(labels.size))] = 0
    parts = {f"part{j}": labels == j for j in range(1, k + 1)}
    return PartMaskSet(width=w, height=h, category=category,
                       parts=parts, foreground=labels != 0)


def parts_as_lists(masks):
    """Convert a PartMaskSet's grids to plain nested lists for the oracle."""
    return {name: [[bool(v) for v in row] for row in grid]
            for name, grid in masks.parts.items()}


def heat_as_lists(heatmap):
    return [[float(v) for v in row] for row in heatmap.values]


def build_manifest_tree(root, images, dataset="synthetic"):
    """Write masks, heatmaps, and a manifest under root.

    images: list of (image_id, category, label_map, index_array, heat_array).
    Heatmaps are written as 16-bit PNGs. Returns the manifest path.
    """
    root.mkdir(parents=True, exist_ok=True)
    (root / "masks").mkdir(exist_ok=True)
    (root / "heatmaps").mkdir(exist_ok=True)
    entries = []
    for image_id, category, label_map, indices, heat in images:
        mask_rel = f"masks/{image_id}.png"
        heat_rel = f"heatmaps/{image_id}.png"
        write_indexed_png(root / mask_rel, np.asarray(indices, dtype=np.uint8))
        write_heatmap_png(root / heat_rel, Heatmap(values=np.asarray(heat, dtype=np.float64)))
        entries.append(ImageEntry(id=image_id, category=category,
                                  mask_path=mask_rel, heatmap_path=heat_rel,
                                  label_map=dict(label_map)))
    manifest = Manifest(dataset=dataset, entries=tuple(entries), root=root)
    path = root / "manifest.json"
    write_manifest(manifest, path)
    return path


def simple_manifest_images(n=3, side=8):
    """n images with two parts each and a heatmap that hits part 1."""
    images = []
    for i in range(n):
        indices = np.zeros((side, side), dtype=np.uint8)
        indices[:side // 2, :side // 2] = 1
        indices[side // 2:, side // 2:] = 2
        heat = np.zeros((side, side))
        heat[:side // 2, :side // 2] = 1.0
        heat[0, side - 1] = 0.25 * (i + 1) / n  # vary a little per image
        images.append((f"img{i}", "toy", {1: "head", 2: "tail"}, indices, heat))
    return images


class _StubHandler(BaseHTTPRequestHandler):
    def do_POST(self):
        length = int(self.headers.get("Content-Length", "0"))
        raw = self.rfile.read(length)
        self.server.requests.append({
            "path": self.path,
            "headers": {k.lower(): v for k, v in self.headers.items()},
            "body": raw,
        })
        behavior = self.server.behavior
        if behavior.get("sleep"):
            time.sleep(behavior["sleep"])
        status = behavior.get("status", 200)
        if "raw_body" in behavior:
            data = behavior["raw_body"]
        else:
            content = behavior.get("content", "REPORT OK")
            data = json.dumps(
                {"choices": [{"message": {"role": "assistant", "content": content}}]}
            ).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


class StubLLM:
    """Local chat-completions stub; configure via .behavior, inspect .requests."""

    def __init__(self):
        self.server = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
        self.server.behavior = {}
        self.server.requests = []
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)
        self.thread.start()

    @property
    def behavior(self):
        return self.server.behavior

    @property
    def requests(self):
        return self.server.requests

    @property
    def endpoint(self):
        host, port = self.server.server_address
        return f"http://{host}:{port}/v1/chat/completions"

    def close(self):
        self.server.shutdown()
        self.server.server_close()


@pytest.fixture
def stub_llm():
    stub = StubLLM()
    yield stub
    stub.close()
