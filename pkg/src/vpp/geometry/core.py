"""Lines, quadrilaterals, homographies, and slope-based point adjustment."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateQuadError, DegenerateSegmentError, PointAtInfinityError

VERTICAL = "vertical"
HORIZONTAL = "horizontal"
OTHER = "other"

Point = tuple[float, float]


@dataclass(frozen=True)
class LineSegment:
    """Directed segment between two image points.

    ``orientation`` is one of {vertical, horizontal, other} once assigned by
    :func:`classify_line`; freshly detected or deserialized segments carry None.
    """

    p1: Point
    p2: Point
    orientation: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.p1 == self.p2:
            raise DegenerateSegmentError(f"segment endpoints coincide at {self.p1}")

    @property
    def length(self) -> float:
        return math.hypot(self.p2[0] - self.p1[0], self.p2[1] - self.p1[1])

    def slope(self) -> float:
        """dy/dx; infinite for exactly vertical segments."""
        dx = self.p2[0] - self.p1[0]
        dy = self.p2[1] - self.p1[1]
        return dy / dx if dx != 0 else math.inf

    def inverse_slope(self) -> float:
        """dx/dy; infinite for exactly horizontal segments."""
        dx = self.p2[0] - self.p1[0]
        dy = self.p2[1] - self.p1[1]
        return dx / dy if dy != 0 else math.inf


def classify_line(seg: LineSegment, angle_tol: float) -> str:
    """Tag a segment as vertical/horizontal/other by its axis angle.

    ``angle_tol`` is in degrees and must lie in (0, 45) so the classes stay
    disjoint. Invariant under endpoint swap.
    """
    if not 0.0 < angle_tol < 45.0:
        raise ValueError(f"angle_tol must be in (0, 45), got {angle_tol}")
    dx = abs(seg.p2[0] - seg.p1[0])
    dy = abs(seg.p2[1] - seg.p1[1])
    angle_from_horizontal = math.degrees(math.atan2(dy, dx))
    if angle_from_horizontal <= angle_tol:
        return HORIZONTAL
    if 90.0 - angle_from_horizontal <= angle_tol:
        return VERTICAL
    return OTHER


def region_line_distance(center: Point, seg: LineSegment) -> float:
    """Distance from a region center to the nearer segment endpoint.

    Endpoint distance, not perpendicular distance: the closest-line selection
    compares region centers against segment endpoints directly.
    """
    d1 = math.hypot(center[0] - seg.p1[0], center[1] - seg.p1[1])
    d2 = math.hypot(center[0] - seg.p2[0], center[1] - seg.p2[1])
    return min(d1, d2)


def point_segment_distance(center: Point, seg: LineSegment) -> float:
    """Perpendicular point-to-segment distance (optional alternative metric)."""
    p = np.asarray(center, dtype=np.float64)
    a = np.asarray(seg.p1, dtype=np.float64)
    b = np.asarray(seg.p2, dtype=np.float64)
    ab = b - a
    t = float(np.dot(p - a, ab) / np.dot(ab, ab))
    t = min(1.0, max(0.0, t))
    return float(np.linalg.norm(p - (a + t * ab)))


def adjust_point(p: Point, m: float, d: float) -> Point:
    """Move ``p`` by signed distance ``d`` along the direction of slope ``m``.

    With r = sqrt(1 + m^2) the result is (x + d/r, y + d*m/r), which lies
    exactly |d| away from p. Vertical directions (infinite slope) are handled
    by callers via an axis swap.
    """
    if not math.isfinite(m):
        raise ValueError("slope must be finite; swap axes for vertical lines")
    r = math.sqrt(1.0 + m * m)
    return (p[0] + d / r, p[1] + d * m / r)


# --- quadrilaterals ---


def _signed_area(corners: np.ndarray) -> float:
    x = corners[:, 0]
    y = corners[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _segments_cross(a1, a2, b1, b2) -> bool:
    """Proper intersection test between segments a1-a2 and b1-b2."""

    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    d1 = orient(b1, b2, a1)
    d2 = orient(b1, b2, a2)
    d3 = orient(a1, a2, b1)
    d4 = orient(a1, a2, b2)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != d2 and d3 != d4


@dataclass(frozen=True)
class Quad:
    """Four image points ordered top-left, top-right, bottom-right, bottom-left.

    Must form a simple (non-self-intersecting) polygon with positive area.
    """

    corners: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.corners, dtype=np.float64)
        if arr.shape != (4, 2) or not np.all(np.isfinite(arr)):
            raise DegenerateQuadError(f"quad expects 4 finite points, got shape {arr.shape}")
        if abs(_signed_area(arr)) <= 1e-12:
            raise DegenerateQuadError("quad has zero area")
        c = [tuple(pt) for pt in arr]
        if _segments_cross(c[0], c[1], c[2], c[3]) or _segments_cross(c[1], c[2], c[3], c[0]):
            raise DegenerateQuadError("quad is self-intersecting")
        arr.flags.writeable = False
        object.__setattr__(self, "corners", arr)

    @classmethod
    def from_bbox(cls, x: float, y: float, w: float, h: float) -> "Quad":
        return cls(np.array([[x, y], [x + w, y], [x + w, y + h], [x, y + h]]))

    @classmethod
    def from_points(cls, pts) -> "Quad":
        return cls(np.asarray(pts, dtype=np.float64))

    @property
    def area(self) -> float:
        return abs(_signed_area(self.corners))

    @property
    def center(self) -> Point:
        c = self.corners.mean(axis=0)
        return (float(c[0]), float(c[1]))

    def to_list(self) -> list[list[float]]:
        return [[float(x), float(y)] for x, y in self.corners]


# --- homographies ---


def _normalize_points(pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hartley normalization: zero centroid, mean distance sqrt(2)."""
    centroid = pts.mean(axis=0)
    dist = np.sqrt(((pts - centroid) ** 2).sum(axis=1)).mean()
    scale = math.sqrt(2.0) / max(dist, 1e-12)
    t = np.array(
        [
            [scale, 0.0, -scale * centroid[0]],
            [0.0, scale, -scale * centroid[1]],
            [0.0, 0.0, 1.0],
        ]
    )
    return (pts - centroid) * scale, t


def _any_three_collinear(pts: np.ndarray, eps: float = 1e-9) -> bool:
    n = len(pts)
    for i in range(n - 2):
        for j in range(i + 1, n - 1):
            for k in range(j + 1, n):
                v1 = pts[j] - pts[i]
                v2 = pts[k] - pts[i]
                if abs(v1[0] * v2[1] - v1[1] * v2[0]) < eps:
                    return True
    return False


@dataclass(frozen=True)
class Homography:
    """Invertible 3x3 projective transform, normalized so m[2][2] = 1."""

    m: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.m, dtype=np.float64)
        if arr.shape != (3, 3) or not np.all(np.isfinite(arr)):
            raise ValueError(f"homography expects a finite 3x3 matrix, got {arr.shape}")
        if abs(arr[2, 2]) > 1e-12:
            arr = arr / arr[2, 2]
        if abs(np.linalg.det(arr)) <= 1e-12:
            raise ValueError("homography matrix is singular")
        arr.flags.writeable = False
        object.__setattr__(self, "m", arr)

    @classmethod
    def identity(cls) -> "Homography":
        return cls(np.eye(3))

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.m))

    def compose(self, other: "Homography") -> "Homography":
        """self after other: (self.compose(other))(p) == self(other(p))."""
        return Homography(self.m @ other.m)


def apply_homography(h: Homography, p: Point) -> Point:
    """Map one point through the projective transform."""
    v = h.m @ np.array([p[0], p[1], 1.0])
    if abs(v[2]) < 1e-12:
        raise PointAtInfinityError(f"point {p} maps to infinity")
    return (float(v[0] / v[2]), float(v[1] / v[2]))


def apply_homography_many(h: Homography, pts: np.ndarray) -> np.ndarray:
    """Map an (N, 2) point array through ``h``; rows mapping to infinity raise."""
    pts = np.asarray(pts, dtype=np.float64)
    w = pts @ h.m[2, :2] + h.m[2, 2]
    if np.any(np.abs(w) < 1e-12):
        raise PointAtInfinityError("some points map to infinity")
    out = pts @ h.m[:2, :2].T + h.m[:2, 2]
    return out / w[:, None]


def dlt_homography(src: np.ndarray, dst: np.ndarray, weights: np.ndarray | None = None) -> Homography:
    """Least-squares homography from N >= 4 correspondences (normalized DLT).

    Both point sets are Hartley-normalized before the SVD solve; optional
    per-correspondence weights scale the equation rows.
    """
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    if src.shape != dst.shape or src.ndim != 2 or src.shape[0] < 4 or src.shape[1] != 2:
        raise ValueError("need matching (N>=4, 2) source and destination arrays")
    sn, ts = _normalize_points(src)
    dn, td = _normalize_points(dst)
    n = len(sn)
    a = np.zeros((2 * n, 9))
    x, y = sn[:, 0], sn[:, 1]
    u, v = dn[:, 0], dn[:, 1]
    a[0::2, 0] = x
    a[0::2, 1] = y
    a[0::2, 2] = 1.0
    a[0::2, 6] = -u * x
    a[0::2, 7] = -u * y
    a[0::2, 8] = -u
    a[1::2, 3] = x
    a[1::2, 4] = y
    a[1::2, 5] = 1.0
    a[1::2, 6] = -v * x
    a[1::2, 7] = -v * y
    a[1::2, 8] = -v
    if weights is not None:
        w = np.sqrt(np.maximum(np.asarray(weights, dtype=np.float64), 0.0))
        a *= np.repeat(w, 2)[:, None]
    if a.shape[0] < 9:
        # economy SVD of a wide matrix drops the null space; zero rows restore it
        a = np.vstack([a, np.zeros((9 - a.shape[0], 9))])
    _, s, vt = np.linalg.svd(a, full_matrices=False)
    if s[-2] < 1e-10 * max(s[0], 1e-300):
        raise DegenerateQuadError("correspondences are rank-deficient")
    hn = vt[-1].reshape(3, 3)
    h = np.linalg.inv(td) @ hn @ ts
    if abs(h[2, 2]) <= 1e-12 or abs(np.linalg.det(h)) <= 1e-12:
        raise DegenerateQuadError("solved homography is singular")
    return Homography(h)


def homography_from_quads(src: Quad, dst: Quad) -> Homography:
    """Exact 4-point homography mapping src corners onto dst corners in order."""
    s = src.corners
    d = dst.corners
    sn, _ = _normalize_points(s)
    dn, _ = _normalize_points(d)
    if _any_three_collinear(sn) or _any_three_collinear(dn):
        raise DegenerateQuadError("three quad corners are collinear")
    return dlt_homography(s, d)
