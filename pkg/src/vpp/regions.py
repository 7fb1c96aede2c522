"""Empty-space proposal: mask intersection, blob labeling, and bbox alignment.

The wall mask and plane label map arrive from external segmentation models
through the file interchange; everything from their intersection onward is
computed here.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DegenerateOutputError, DimensionMismatchError, FormatError
from .geometry import (
    HORIZONTAL,
    VERTICAL,
    LineSegment,
    Quad,
    classify_line,
    point_segment_distance,
    region_line_distance,
)
from .imaging import BinaryMask


@dataclass(frozen=True)
class LabelMap:
    """Per-pixel non-negative integer ids (semantic classes or plane ids)."""

    labels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.labels)
        if arr.ndim != 2 or not np.issubdtype(arr.dtype, np.integer):
            raise FormatError(f"LabelMap expects (H, W) integers, got {arr.shape} {arr.dtype}")
        if arr.min(initial=0) < 0:
            raise FormatError("labels must be non-negative")
        arr = arr.astype(np.int32, copy=False)
        arr.flags.writeable = False
        object.__setattr__(self, "labels", arr)

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]


@dataclass(frozen=True)
class Component:
    """One 8-connected blob: scan-order pixel coordinates plus bounding box."""

    label: int
    pixels: np.ndarray  # (N, 2) int32 rows of (y, x), scan order
    bbox: tuple[int, int, int, int]  # x, y, w, h

    @property
    def area(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class RegionProposal:
    """Candidate placement region: axis-aligned bbox plus optional aligned quad."""

    bbox: tuple[int, int, int, int]
    blob_area: int
    aligned: Quad | None = None

    def to_dict(self) -> dict:
        return {
            "bbox": list(self.bbox),
            "area": self.blob_area,
            "quad": self.aligned.to_list() if self.aligned else None,
        }


def empty_space_mask(wall: BinaryMask, plane: LabelMap, plane_id: int) -> BinaryMask:
    """Pixels that are wall AND belong to the chosen plane."""
    if (wall.width, wall.height) != (plane.width, plane.height):
        raise DimensionMismatchError(
            f"wall {wall.width}x{wall.height} vs plane {plane.width}x{plane.height}"
        )
    return BinaryMask(wall.bits & (plane.labels == plane_id))


def select_plane_id(wall: BinaryMask, plane: LabelMap) -> int:
    """Plane label with the largest overlap with the wall mask.

    Label 0 means "no plane" in the interchange format and is never selected;
    returns 0 only when no positive label overlaps the wall at all.
    """
    overlap = np.bincount(plane.labels[wall.bits].ravel())
    if overlap.size <= 1:
        return 0
    return int(np.argmax(overlap[1:]) + 1) if overlap[1:].max(initial=0) > 0 else 0


def connected_components(mask: BinaryMask) -> list[Component]:
    """8-connected components, largest first (ties by top-left scan order).

    Two-pass run labeling: consecutive true runs per row are unioned with
    8-adjacent runs of the previous row.
    """
    bits = mask.bits
    h, w = bits.shape
    parent: list[int] = []

    def find(i: int) -> int:
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    padded = np.zeros(w + 2, dtype=bool)
    rows: list[list[tuple[int, int, int]]] = []  # per row: (x_start, x_end_excl, run_id)
    prev: list[tuple[int, int, int]] = []
    for y in range(h):
        padded[1:-1] = bits[y]
        delta = np.diff(padded.view(np.int8))
        starts = np.nonzero(delta == 1)[0]
        ends = np.nonzero(delta == -1)[0]
        cur: list[tuple[int, int, int]] = []
        for x0, x1 in zip(starts, ends):
            run_id = len(parent)
            parent.append(run_id)
            # prev runs are pre-expanded by 1 column so half-open overlap = 8-adjacency
            for px0, px1, pid in prev:
                if px0 < x1 and x0 < px1:
                    union(run_id, pid)
            cur.append((int(x0), int(x1), run_id))
        rows.append(cur)
        prev = [(x0 - 1, x1 + 1, rid) for x0, x1, rid in cur]
    if not parent:
        return []

    groups: dict[int, list[tuple[int, int, int]]] = {}
    for y, row in enumerate(rows):
        for x0, x1, rid in row:
            groups.setdefault(find(rid), []).append((y, x0, x1))
    comps = []
    for root, runs in groups.items():
        n = sum(x1 - x0 for _, x0, x1 in runs)
        pixels = np.empty((n, 2), dtype=np.int32)
        pos = 0
        for y, x0, x1 in runs:
            k = x1 - x0
            pixels[pos : pos + k, 0] = y
            pixels[pos : pos + k, 1] = np.arange(x0, x1)
            pos += k
        ys = pixels[:, 0]
        xs = pixels[:, 1]
        bbox = (int(xs.min()), int(ys.min()), int(xs.max() - xs.min() + 1), int(ys.max() - ys.min() + 1))
        comps.append(Component(root, pixels, bbox))
    comps.sort(key=lambda c: (-c.area, int(c.pixels[0, 0]), int(c.pixels[0, 1])))
    return [Component(i, c.pixels, c.bbox) for i, c in enumerate(comps)]


def propose_regions(
    mask: BinaryMask,
    min_area: int,
    min_fill: float = 0.6,
    min_aspect: float = 0.25,
    max_aspect: float = 4.0,
) -> list[RegionProposal]:
    """Filter blobs into placement candidates, sorted by area descending."""
    if min_area < 1:
        raise ValueError("min_area must be >= 1")
    if not 0.0 < min_fill <= 1.0:
        raise ValueError("min_fill must be in (0, 1]")
    out = []
    for comp in connected_components(mask):
        x, y, w, h = comp.bbox
        if comp.area < min_area:
            continue
        if comp.area / (w * h) < min_fill:
            continue
        aspect = w / h
        if not min_aspect <= aspect <= max_aspect:
            continue
        out.append(RegionProposal(comp.bbox, comp.area))
    return out


def align_region(
    region: RegionProposal,
    lines: list[LineSegment],
    angle_tol: float = 10.0,
    distance_budget: float | None = None,
    distance_mode: str = "endpoint",
) -> Quad:
    """Shear the bbox onto the slopes of the closest vertical/horizontal lines.

    The closest horizontal line lends its slope to the top/bottom edges and the
    closest vertical line to the left/right edges; each corner moves along the
    adopted slope by its signed distance from the edge midpoint. Lines beyond
    ``distance_budget`` (default 1.5x the bbox diagonal) are ignored, leaving
    that axis axis-aligned. Raises DegenerateOutputError when the sheared quad
    self-intersects or its area leaves [0.5, 2.0]x the bbox area; callers fall
    back to the axis-aligned bbox.
    """
    x, y, w, h = region.bbox
    cx, cy = x + w / 2.0, y + h / 2.0
    if distance_budget is None:
        distance_budget = 1.5 * math.hypot(w, h)
    dist_fn = region_line_distance if distance_mode == "endpoint" else point_segment_distance

    best: dict[str, tuple[float, LineSegment]] = {}
    for seg in lines:
        tag = classify_line(seg, angle_tol)
        if tag not in (VERTICAL, HORIZONTAL):
            continue
        d = dist_fn((cx, cy), seg)
        if d > distance_budget:
            continue
        if tag not in best or d < best[tag][0]:
            best[tag] = (d, seg)

    # unit direction of each edge family, from the adopted line slopes
    m_h = best[HORIZONTAL][1].slope() if HORIZONTAL in best else 0.0
    m_v = best[VERTICAL][1].inverse_slope() if VERTICAL in best else 0.0
    rh = math.sqrt(1.0 + m_h * m_h)
    rv = math.sqrt(1.0 + m_v * m_v)
    ux, uy = 1.0 / rh, m_h / rh
    vx, vy = m_v / rv, 1.0 / rv

    hw, hh = w / 2.0, h / 2.0
    corners = np.array(
        [
            [cx - hw * ux - hh * vx, cy - hw * uy - hh * vy],
            [cx + hw * ux - hh * vx, cy + hw * uy - hh * vy],
            [cx + hw * ux + hh * vx, cy + hw * uy + hh * vy],
            [cx - hw * ux + hh * vx, cy - hw * uy + hh * vy],
        ]
    )
    try:
        quad = Quad(corners)
    except Exception as exc:
        raise DegenerateOutputError(f"aligned quad degenerate: {exc}") from exc
    ratio = quad.area / (w * h)
    if not 0.5 <= ratio <= 2.0:
        raise DegenerateOutputError(f"aligned quad area ratio {ratio:.3f} outside [0.5, 2.0]")
    return quad


# --- interchange ---


def load_labelmap(path: str | Path) -> LabelMap:
    """Read a 16-bit (or 8-bit) grayscale PNG as a label map."""
    try:
        img = Image.open(Path(path))
        img.load()
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise FormatError(f"{path}: malformed label PNG: {exc}") from exc
    if img.mode in ("I;16", "I;16B", "I;16L", "I;16N"):
        arr = np.asarray(img, dtype=np.uint16).astype(np.int32)
    elif img.mode == "I":
        arr = np.asarray(img, dtype=np.int32)
    elif img.mode == "L":
        arr = np.asarray(img, dtype=np.uint8).astype(np.int32)
    else:
        raise FormatError(f"label maps must be grayscale PNG, got mode {img.mode}")
    return LabelMap(arr)


def save_labelmap(labels: LabelMap, path: str | Path) -> None:
    """Write a label map as 16-bit grayscale PNG."""
    arr = labels.labels
    if arr.max(initial=0) > 65535:
        raise FormatError("labels exceed 16-bit range")
    Image.fromarray(arr.astype(np.uint16)).save(Path(path), format="PNG")


def save_proposals(proposals: list[RegionProposal], path: str | Path) -> None:
    Path(path).write_text(json.dumps([p.to_dict() for p in proposals]))


def load_proposals(path: str | Path) -> list[RegionProposal]:
    try:
        doc = json.loads(Path(path).read_text())
        return [
            RegionProposal(
                tuple(entry["bbox"]),
                int(entry["area"]),
                Quad.from_points(entry["quad"]) if entry.get("quad") else None,
            )
            for entry in doc
        ]
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: invalid proposal JSON: {exc}") from exc
