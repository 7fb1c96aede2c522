"""Writers for the pipeline's interchange file formats.

These deliberately do not import the pipeline package: the adapters talk to
it only through files, so the formats are pinned here byte-for-byte.

    <stem>.wall.png        8-bit grayscale PNG, 0 = background, 255 = wall
    <stem>.planes.png      16-bit grayscale PNG, pixel value = plane id, 0 = none
    <stem>.human.png       8-bit grayscale PNG, 0/255 human mask
    <stem>.detections.json {"detections": [{"label", "score", "bbox": [x,y,w,h]}]}
    <stem>.lines.json      {"segments": [[x1, y1, x2, y2], ...]}
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

WALL_SUFFIX = ".wall.png"
PLANES_SUFFIX = ".planes.png"
HUMAN_SUFFIX = ".human.png"
DETECTIONS_SUFFIX = ".detections.json"
LINES_SUFFIX = ".lines.json"

ARTIFACT_KINDS = ("wall", "planes", "human", "detections", "lines")


def write_mask(mask: np.ndarray, path: Path) -> None:
    if mask.ndim != 2 or mask.dtype != np.bool_:
        raise ValueError(f"mask must be (H, W) bool, got {mask.shape} {mask.dtype}")
    Image.fromarray(mask.astype(np.uint8) * 255).save(path, format="PNG")


def write_labelmap(labels: np.ndarray, path: Path) -> None:
    if labels.ndim != 2 or not np.issubdtype(labels.dtype, np.integer):
        raise ValueError(f"labels must be (H, W) ints, got {labels.shape} {labels.dtype}")
    if labels.min(initial=0) < 0 or labels.max(initial=0) > 65535:
        raise ValueError("labels must fit in uint16")
    Image.fromarray(labels.astype(np.uint16)).save(path, format="PNG")


def write_detections(detections: list[dict], path: Path) -> None:
    for d in detections:
        if not 0.0 <= d["score"] <= 1.0 or len(d["bbox"]) != 4:
            raise ValueError(f"bad detection entry: {d}")
    doc = {
        "detections": [
            {
                "label": str(d["label"]),
                "score": float(d["score"]),
                "bbox": [float(v) for v in d["bbox"]],
            }
            for d in detections
        ]
    }
    path.write_text(json.dumps(doc))


def write_lines(segments: list[tuple[float, float, float, float]], path: Path) -> None:
    for seg in segments:
        if len(seg) != 4 or (seg[0], seg[1]) == (seg[2], seg[3]):
            raise ValueError(f"bad segment: {seg}")
    path.write_text(json.dumps({"segments": [[float(v) for v in seg] for seg in segments]}))


def load_frame(path: Path) -> np.ndarray:
    """Read a frame as (H, W, 3) uint8 RGB."""
    img = Image.open(path)
    img.load()
    if img.mode == "L":
        arr = np.asarray(img, dtype=np.uint8)
        return np.repeat(arr[:, :, None], 3, axis=2)
    return np.asarray(img.convert("RGB"), dtype=np.uint8).copy()
