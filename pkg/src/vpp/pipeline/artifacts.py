"""Per-frame interchange artifacts, matched to frames by basename stem.

External models communicate with the pipeline only through these files,
all living in one artifacts directory:

    <stem>.wall.png        8-bit mask PNG (wall pixels)
    <stem>.planes.png      16-bit label PNG (plane ids, 0 = none)
    <stem>.human.png       8-bit mask PNG (human pixels)
    <stem>.detections.json object detections
    <stem>.lines.json      line segments
    <stem>.features.json   injected keypoints/descriptors (optional)
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from ..errors import DimensionMismatchError
from ..geometry import LineSegment, load_line_segments
from ..imaging import BinaryMask, load_mask
from ..regions import LabelMap, load_labelmap
from ..scene import Detection, load_detections
from ..tracker import BinaryDescriptor, Keypoint, load_features

WALL_SUFFIX = ".wall.png"
PLANES_SUFFIX = ".planes.png"
HUMAN_SUFFIX = ".human.png"
DETECTIONS_SUFFIX = ".detections.json"
LINES_SUFFIX = ".lines.json"
FEATURES_SUFFIX = ".features.json"


@dataclass(frozen=True)
class FrameArtifacts:
    wall: BinaryMask | None = None
    plane: LabelMap | None = None
    human: BinaryMask | None = None
    detections: list[Detection] | None = None
    lines: list[LineSegment] | None = None
    features: tuple[list[Keypoint], list[BinaryDescriptor]] | None = None


def load_frame_artifacts(
    artifacts_dir: Path | None, stem: str, frame_size: tuple[int, int]
) -> FrameArtifacts:
    """Load whichever artifacts exist for a frame; rasters must match its size."""
    if artifacts_dir is None:
        return FrameArtifacts()
    w, h = frame_size

    def check(raster, kind: str):
        if (raster.width, raster.height) != (w, h):
            raise DimensionMismatchError(
                f"{stem}{kind}: {raster.width}x{raster.height} does not match frame {w}x{h}"
            )
        return raster

    wall = plane = human = detections = lines = features = None
    p = artifacts_dir / f"{stem}{WALL_SUFFIX}"
    if p.is_file():
        wall = check(load_mask(p), WALL_SUFFIX)
    p = artifacts_dir / f"{stem}{PLANES_SUFFIX}"
    if p.is_file():
        plane = check(load_labelmap(p), PLANES_SUFFIX)
    p = artifacts_dir / f"{stem}{HUMAN_SUFFIX}"
    if p.is_file():
        human = check(load_mask(p), HUMAN_SUFFIX)
    p = artifacts_dir / f"{stem}{DETECTIONS_SUFFIX}"
    if p.is_file():
        detections = load_detections(p, frame_size)
    p = artifacts_dir / f"{stem}{LINES_SUFFIX}"
    if p.is_file():
        lines = load_line_segments(p)
    p = artifacts_dir / f"{stem}{FEATURES_SUFFIX}"
    if p.is_file():
        features = load_features(p)
    return FrameArtifacts(wall, plane, human, detections, lines, features)
