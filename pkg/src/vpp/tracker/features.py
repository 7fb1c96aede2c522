"""Keypoint detection (FAST-9) and binary description (rotated BRIEF).

Single-scale by design: consecutive video frames with small camera motion
have negligible scale change. The BRIEF sampling pattern is generated once
from a seed baked into the artifact so descriptors are bit-identical across
runs and machines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..errors import DimensionMismatchError, ImageTooSmallError
from ..imaging import BinaryMask, ImageGray, dilate

# FAST circle of radius 3 (16 pixels), clockwise from the top.
_CIRCLE = np.array(
    [
        (0, -3), (1, -3), (2, -2), (3, -1), (3, 0), (3, 1), (2, 2), (1, 3),
        (0, 3), (-1, 3), (-2, 2), (-3, 1), (-3, 0), (-3, -1), (-2, -2), (-1, -3),
    ]
)
_ARC_LEN = 9
_ORIENTATION_RADIUS = 15
_DESCRIBE_MARGIN = 20
_PATTERN_SEED = 20220214
_N_TESTS = 256


def _make_pattern(seed: int) -> np.ndarray:
    """(256, 4) int offsets (x1, y1, x2, y2), every point inside the radius-15 disk."""
    rng = np.random.default_rng(seed)
    rows = []
    while len(rows) < _N_TESTS:
        pts = np.rint(rng.normal(0.0, 6.0, size=4)).astype(np.int64)
        x1, y1, x2, y2 = pts
        if x1 * x1 + y1 * y1 > _ORIENTATION_RADIUS**2:
            continue
        if x2 * x2 + y2 * y2 > _ORIENTATION_RADIUS**2:
            continue
        if x1 == x2 and y1 == y2:
            continue
        rows.append((x1, y1, x2, y2))
    return np.array(rows, dtype=np.float64)

_PATTERN = _make_pattern(_PATTERN_SEED)

_disk_dx, _disk_dy = np.meshgrid(
    np.arange(-_ORIENTATION_RADIUS, _ORIENTATION_RADIUS + 1),
    np.arange(-_ORIENTATION_RADIUS, _ORIENTATION_RADIUS + 1),
)
_disk_keep = _disk_dx**2 + _disk_dy**2 <= _ORIENTATION_RADIUS**2
_DISK_DX = _disk_dx[_disk_keep]
_DISK_DY = _disk_dy[_disk_keep]
del _disk_dx, _disk_dy, _disk_keep


@dataclass(frozen=True)
class Keypoint:
    """Sub-pixel corner with FAST response and intensity-centroid orientation."""

    x: float
    y: float
    response: float
    orientation: float = 0.0


@dataclass(frozen=True)
class BinaryDescriptor:
    """256-bit rotated-BRIEF descriptor packed into 32 bytes."""

    bits: bytes

    def __post_init__(self):
        if len(self.bits) != 32:
            raise ValueError(f"descriptor must be 32 bytes, got {len(self.bits)}")

    def hamming(self, other: "BinaryDescriptor") -> int:
        return (int.from_bytes(self.bits, "big") ^ int.from_bytes(other.bits, "big")).bit_count()


@dataclass(frozen=True)
class FastParams:
    fast_threshold: int = 20
    max_keypoints: int = 500
    nms_radius: int = 4


def detect_keypoints(img: ImageGray, params: FastParams | None = None) -> list[Keypoint]:
    """FAST-9 corners with square NMS, strongest ``max_keypoints`` kept.

    Deterministic: results are ordered by response descending, then scan order.
    """
    if img.width < 32 or img.height < 32:
        raise ImageTooSmallError(f"need at least 32x32, got {img.width}x{img.height}")
    p = params or FastParams()
    data = img.data.astype(np.int16)
    h, w = data.shape
    t = p.fast_threshold

    interior = data[3 : h - 3, 3 : w - 3]
    hi = interior + t
    lo = interior - t

    # coarse test on the 4 compass pixels: any 9-arc covers at least 2 of them
    compass = _CIRCLE[[0, 4, 8, 12]]
    nb = np.zeros_like(interior)
    nd = np.zeros_like(interior)
    for dx, dy in compass:
        v = data[3 + dy : h - 3 + dy, 3 + dx : w - 3 + dx]
        nb += v > hi
        nd += v < lo
    cand_y, cand_x = np.nonzero((nb >= 2) | (nd >= 2))
    if cand_y.size == 0:
        return []
    cy = cand_y + 3
    cx = cand_x + 3

    circle = np.empty((16, cy.size), dtype=np.int16)
    for k, (dx, dy) in enumerate(_CIRCLE):
        circle[k] = data[cy + dy, cx + dx]
    center = data[cy, cx]
    bright = circle > (center + t)
    dark = circle < (center - t)

    def arc_ok(flags: np.ndarray) -> np.ndarray:
        ext = np.concatenate([flags, flags[: _ARC_LEN - 1]], axis=0)
        ok = np.zeros(flags.shape[1], dtype=bool)
        for k in range(16):
            ok |= ext[k : k + _ARC_LEN].all(axis=0)
        return ok

    is_bright = arc_ok(bright)
    is_dark = arc_ok(dark)
    corner = is_bright | is_dark
    if not corner.any():
        return []

    diff = circle.astype(np.int32) - center
    score_b = np.where(bright, diff - t, 0).sum(axis=0)
    score_d = np.where(dark, -diff - t, 0).sum(axis=0)
    score = np.where(is_bright, score_b, 0) + np.where(is_dark, score_d, 0)
    score = np.where(corner, score, 0)

    score_map = np.zeros((h, w), dtype=np.int32)
    score_map[cy, cx] = score
    local_max = ndimage.maximum_filter(score_map, size=2 * p.nms_radius + 1, mode="constant")
    keep = corner & (score_map[cy, cx] == local_max[cy, cx]) & (score > 0)
    ky, kx, ks = cy[keep], cx[keep], score[keep]

    order = np.lexsort((kx, ky, -ks))[: p.max_keypoints]
    dataf = data.astype(np.float64)
    return [
        Keypoint(float(kx[i]), float(ky[i]), float(ks[i]), _orientation(dataf, kx[i], ky[i]))
        for i in order
    ]


def _orientation(data: np.ndarray, x: int, y: int) -> float:
    """Intensity-centroid angle over the radius-15 disk, clipped at borders."""
    h, w = data.shape
    px = _DISK_DX + x
    py = _DISK_DY + y
    ok = (px >= 0) & (px < w) & (py >= 0) & (py < h)
    vals = data[py[ok], px[ok]]
    m10 = float((_DISK_DX[ok] * vals).sum())
    m01 = float((_DISK_DY[ok] * vals).sum())
    if m10 == 0.0 and m01 == 0.0:
        return 0.0
    return math.atan2(m01, m10)


def describe(
    img: ImageGray, keypoints: list[Keypoint]
) -> tuple[list[Keypoint], list[BinaryDescriptor]]:
    """Rotated-BRIEF descriptors on a Gaussian-smoothed image.

    Keypoints closer than 20 px to any border cannot host the rotated pattern
    and are dropped; the returned keypoint list is the kept subset, aligned
    index-for-index with the descriptors.
    """
    if not keypoints:
        return [], []
    blurred = ndimage.gaussian_filter(img.data.astype(np.float64), sigma=2.0)
    h, w = blurred.shape
    kept = [
        kp
        for kp in keypoints
        if _DESCRIBE_MARGIN <= kp.x <= w - 1 - _DESCRIBE_MARGIN
        and _DESCRIBE_MARGIN <= kp.y <= h - 1 - _DESCRIBE_MARGIN
    ]
    if not kept:
        return [], []

    xs = np.array([kp.x for kp in kept])
    ys = np.array([kp.y for kp in kept])
    cos = np.cos([kp.orientation for kp in kept])
    sin = np.sin([kp.orientation for kp in kept])

    def sample(ox: np.ndarray, oy: np.ndarray) -> np.ndarray:
        # rotate pattern offsets by each keypoint's orientation, then gather
        rx = np.rint(ox[None, :] * cos[:, None] - oy[None, :] * sin[:, None] + xs[:, None])
        ry = np.rint(ox[None, :] * sin[:, None] + oy[None, :] * cos[:, None] + ys[:, None])
        return blurred[ry.astype(np.intp), rx.astype(np.intp)]

    a = sample(_PATTERN[:, 0], _PATTERN[:, 1])
    b = sample(_PATTERN[:, 2], _PATTERN[:, 3])
    bits = np.packbits((a < b).astype(np.uint8), axis=1)
    return kept, [BinaryDescriptor(row.tobytes()) for row in bits]


def filter_keypoints_by_mask(
    keypoints: list[Keypoint],
    descriptors: list[BinaryDescriptor],
    human_mask: BinaryMask,
    margin: int = 5,
) -> tuple[list[Keypoint], list[BinaryDescriptor]]:
    """Drop keypoints inside the human mask dilated by ``margin`` pixels.

    Tracking should lock onto the background, not onto moving people; the
    margin also removes features straddling imperfect silhouette boundaries.
    """
    if len(keypoints) != len(descriptors):
        raise ValueError("keypoints and descriptors must pair up")
    grown = dilate(human_mask, margin).bits
    h, w = grown.shape
    kept_k, kept_d = [], []
    for kp, desc in zip(keypoints, descriptors):
        ix, iy = int(round(kp.x)), int(round(kp.y))
        if not (0 <= ix < w and 0 <= iy < h):
            raise DimensionMismatchError(f"keypoint ({kp.x}, {kp.y}) outside {w}x{h} mask")
        if not grown[iy, ix]:
            kept_k.append(kp)
            kept_d.append(desc)
    return kept_k, kept_d
