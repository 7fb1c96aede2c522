from .core import (
    HORIZONTAL,
    OTHER,
    VERTICAL,
    Homography,
    LineSegment,
    Point,
    Quad,
    adjust_point,
    apply_homography,
    apply_homography_many,
    classify_line,
    dlt_homography,
    homography_from_quads,
    point_segment_distance,
    region_line_distance,
)
from .lines import (
    LineDetectParams,
    detect_line_segments,
    load_line_segments,
    save_line_segments,
)

__all__ = [
    "HORIZONTAL",
    "OTHER",
    "VERTICAL",
    "Homography",
    "LineSegment",
    "LineDetectParams",
    "Point",
    "Quad",
    "adjust_point",
    "apply_homography",
    "apply_homography_many",
    "classify_line",
    "detect_line_segments",
    "dlt_homography",
    "homography_from_quads",
    "load_line_segments",
    "point_segment_distance",
    "region_line_distance",
    "save_line_segments",
]
