"""Shared builders for the harness tests.

The downstream pqah toolkit is exercised only through its published
surfaces: the console script and the manifest/mask/heatmap/scores file
formats. Nothing here imports the pqah package.
"""

import functools
import json
import shutil
import struct
import subprocess
import sys
from pathlib import Path

import numpy as np
from PIL import Image

F32_HEADER = struct.Struct("<4sII")


def acceptance(line):
    """Append a criterion line to the suite-wide acceptance section.

    The section lives in the scorer suite's conftest when both suites are
    collected together; standalone harness runs simply drop the line.
    """
    try:
        import conftest

        conftest.ACCEPTANCE_LINES.append(line)
    except (ImportError, AttributeError):
        pass


def criterion(name):
    """Record a [PASS]/[FAIL]/[SKIP] acceptance line for the wrapped test."""

    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                result = fn(*args, **kwargs)
            except BaseException as exc:
                if exc.__class__.__name__ == "Skipped":
                    acceptance(f"[SKIP] {name}: {exc}")
                else:
                    acceptance(f"[FAIL] {name}")
                raise
            acceptance(f"[PASS] {name}")
            return result

        return wrapper

    return decorate


def run_pqah(args, **kwargs):
    """Invoke the scorer's console script (module fallback) as a subprocess."""
    exe = shutil.which("pqah")
    cmd = [exe] if exe else [sys.executable, "-m", "pqah.cli"]
    return subprocess.run(cmd + list(args), capture_output=True, text=True, **kwargs)


def read_f32(path):
    """Parse an F32 heatmap grid independently of the packages under test."""
    blob = Path(path).read_bytes()
    magic, width, height = F32_HEADER.unpack_from(blob)
    assert magic == b"PQF1", magic
    values = np.frombuffer(blob, dtype="<f4", offset=F32_HEADER.size)
    assert values.size == width * height, (values.size, width, height)
    return values.reshape(height, width).astype(np.float64)


def read_png16(path):
    """Decode a 16-bit grayscale heatmap PNG to floats in [0, 1]."""
    with Image.open(path) as img:
        samples = np.asarray(img, dtype=np.float64)
    return samples / 65535.0


def write_image(path, rng, size=(64, 64)):
    """Write a noise RGB image with a bright block somewhere inside."""
    width, height = size
    arr = rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8)
    top = int(rng.integers(2, height // 2))
    left = int(rng.integers(2, width // 2))
    arr[top:top + height // 3, left:left + width // 3] = (245, 90, 40)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(arr).save(path)


def write_two_part_mask(path, rng, size=(64, 64)):
    """Write an indexed mask: a rectangle split into part indices 1 and 2.

    The rectangle stays strictly inside the frame so background pixels
    always exist, and both halves are non-empty.
    """
    width, height = size
    idx = np.zeros((height, width), dtype=np.uint8)
    rect_w = int(rng.integers(8, max(9, width // 2)))
    rect_h = int(rng.integers(6, max(7, height // 2)))
    top = int(rng.integers(1, height - rect_h - 1))
    left = int(rng.integers(1, width - rect_w - 1))
    half = rect_w // 2
    idx[top:top + rect_h, left:left + half] = 1
    idx[top:top + rect_h, left + half:left + rect_w] = 2
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(idx, mode="L").save(path)


LABEL_MAP = {"1": "core", "2": "rim"}
CATEGORIES = ("widget", "gadget")


def build_dataset(root, count, seed=0, sizes=((64, 64), (56, 72), (80, 64))):
    """Create `count` images with masks under `root`; return per-image info.

    Layout: root/images/img###.png and root/masks/img###.png. Returns a dict
    stem -> {"size": (w, h), "category": name}.
    """
    rng = np.random.default_rng(seed)
    info = {}
    for i in range(count):
        stem = f"img{i:03d}"
        size = sizes[i % len(sizes)]
        write_image(Path(root) / "images" / f"{stem}.png", rng, size)
        write_two_part_mask(Path(root) / "masks" / f"{stem}.png", rng, size)
        info[stem] = {"size": size, "category": CATEGORIES[i % 2]}
    return info


def merge_manifest(root, out_dir, info, manifest_name):
    """Combine an extraction fragment with mask annotations into a manifest.

    `root` holds masks/ and the manifest; `out_dir` (under root) holds the
    fragment and heatmaps. Returns the manifest path.
    """
    root = Path(root)
    out_dir = Path(out_dir)
    with open(out_dir / "manifest_fragment.json", "r", encoding="utf-8") as fh:
        fragment = json.load(fh)
    entries = []
    for entry in fragment["entries"]:
        stem = entry["id"]
        heat_rel = (out_dir / entry["heatmap_path"]).relative_to(root)
        entries.append(
            {
                "id": stem,
                "category": info[stem]["category"],
                "mask_path": f"masks/{stem}.png",
                "heatmap_path": str(heat_rel),
                "label_map": dict(LABEL_MAP),
            }
        )
    manifest = {"dataset": f"synthetic-{fragment['model']}", "entries": entries}
    path = root / manifest_name
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
    return path


def read_scores(path):
    """Load a scores JSONL file as a list of dicts."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(json.loads(line))
    return records


def read_summary_q2(path):
    """Return {label: mean_q2} from a summary CSV."""
    lines = Path(path).read_text(encoding="utf-8").strip().splitlines()
    assert lines[0] == "label,mean_q1,mean_q2,mean_q3", lines[0]
    out = {}
    for line in lines[1:]:
        label, _q1, q2, _q3 = line.split(",")
        out[label] = float(q2)
    return out
