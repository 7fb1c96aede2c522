"""Quad propagation across frames and the reprojection-error metric."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import DegenerateQuadError, DegenerateTrackError, FormatError
from ..geometry import Homography, Quad, apply_homography_many
from .features import BinaryDescriptor, Keypoint

# area growth/shrink beyond this factor between consecutive frames means the
# homography cannot be mild camera movement
_MAX_AREA_CHANGE = 4.0


def track_quad(prev_quad: Quad, h: Homography) -> Quad:
    """Map the previous ad location through the frame-to-frame homography.

    Raises DegenerateTrackError when the propagated quad self-intersects or
    its area changes by more than 4x, both signs that tracking has failed.
    """
    corners = apply_homography_many(h, prev_quad.corners)
    try:
        quad = Quad(corners)
    except DegenerateQuadError as exc:
        raise DegenerateTrackError(f"tracked quad degenerate: {exc}") from exc
    ratio = quad.area / prev_quad.area
    if ratio > _MAX_AREA_CHANGE or ratio < 1.0 / _MAX_AREA_CHANGE:
        raise DegenerateTrackError(f"tracked quad area changed {ratio:.2f}x")
    return quad


def reprojection_error(h: Homography, prev_quad: Quad, curr_quad: Quad) -> float:
    """Mean corner distance between prev_quad and h^-1 applied to curr_quad.

    Measures how far off the previous-frame ad location is when the learned
    transform is reversed from the current frame's location.
    """
    back = apply_homography_many(h.inverse(), curr_quad.corners)
    return float(np.linalg.norm(back - prev_quad.corners, axis=1).mean())


# --- interchange for externally produced keypoints/descriptors ---
# {"keypoints": [[x, y, response, orientation], ...], "descriptors": [hex, ...]}


def save_features(
    keypoints: list[Keypoint], descriptors: list[BinaryDescriptor], path: str | Path
) -> None:
    if len(keypoints) != len(descriptors):
        raise ValueError("keypoints and descriptors must pair up")
    doc = {
        "keypoints": [[kp.x, kp.y, kp.response, kp.orientation] for kp in keypoints],
        "descriptors": [d.bits.hex() for d in descriptors],
    }
    Path(path).write_text(json.dumps(doc))


def load_features(path: str | Path) -> tuple[list[Keypoint], list[BinaryDescriptor]]:
    try:
        doc = json.loads(Path(path).read_text())
        kps = [Keypoint(float(x), float(y), float(r), float(o)) for x, y, r, o in doc["keypoints"]]
        descs = [BinaryDescriptor(bytes.fromhex(h)) for h in doc["descriptors"]]
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: invalid features JSON: {exc}") from exc
    if len(kps) != len(descs):
        raise FormatError(f"{path}: {len(kps)} keypoints vs {len(descs)} descriptors")
    return kps, descs
