"""Evaluation metrics: quad IoU, edge-angle deviation, and report aggregation."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np
from shapely.geometry import Polygon

from ..errors import DegenerateQuadError
from ..geometry import Quad

if TYPE_CHECKING:
    from .run import FrameResult


def quad_iou(a: Quad, b: Quad) -> float:
    """Intersection-over-union of two simple quads via exact polygon clipping."""
    pa = Polygon(a.to_list())
    pb = Polygon(b.to_list())
    if not pa.is_valid or not pb.is_valid:
        raise DegenerateQuadError("quad is not a valid simple polygon")
    inter = pa.intersection(pb).area
    union = pa.union(pb).area
    if union <= 0.0:
        raise DegenerateQuadError("zero union area")
    return inter / union


def angle_deviation(a: Quad, b: Quad) -> float:
    """Mean absolute angle difference over the 4 corresponding edges, in degrees.

    Each per-edge difference is folded to the minor angle (<= 90 deg).
    """
    total = 0.0
    for i in range(4):
        va = a.corners[(i + 1) % 4] - a.corners[i]
        vb = b.corners[(i + 1) % 4] - b.corners[i]
        if not (va.any() and vb.any()):
            raise DegenerateQuadError("zero-length quad edge")
        da = math.degrees(math.atan2(va[1], va[0]))
        db = math.degrees(math.atan2(vb[1], vb[0]))
        diff = abs(da - db) % 180.0
        total += min(diff, 180.0 - diff)
    return total / 4.0


def report_metrics(
    results: "list[FrameResult]",
    ground_truth: dict[str, Quad] | None = None,
    overlap_threshold: float = 0.0,
) -> dict:
    """Aggregate per-frame results (and optional GT quads) into a JSON-able report.

    ``overlap_threshold`` sets what counts as a GT box overlap (IoU strictly
    above it; 0 by default, i.e. any overlap counts).
    """
    report: dict = {
        "n_frames": len(results),
        "n_kitchen": sum(1 for r in results if r.is_kitchen),
        "n_with_quad": sum(1 for r in results if r.quad is not None),
        "mean_iou": None,
        "mean_angle_deviation_deg": None,
        "gt_overlap": None,
        "overlap_iou_threshold": overlap_threshold,
        "mean_reproj_error_px": None,
        "fps": None,
    }
    reproj = [r.reproj_error for r in results if r.reproj_error is not None]
    if reproj:
        report["mean_reproj_error_px"] = float(np.mean(reproj))

    if ground_truth is not None:
        ious = []
        devs = []
        overlaps = 0
        total = 0
        for r in results:
            gt = ground_truth.get(r.stem)
            if gt is None:
                continue
            total += 1
            if r.quad is None:
                ious.append(0.0)
                continue
            iou = quad_iou(r.quad, gt)
            ious.append(iou)
            devs.append(angle_deviation(r.quad, gt))
            if iou > overlap_threshold:
                overlaps += 1
        if ious:
            report["mean_iou"] = float(np.mean(ious))
        if devs:
            report["mean_angle_deviation_deg"] = float(np.mean(devs))
        report["gt_overlap"] = {"count": overlaps, "total": total}

    stage_totals: dict[str, float] = {}
    for r in results:
        for stage, ms in r.timing.items():
            stage_totals[stage] = stage_totals.get(stage, 0.0) + ms
    if results and stage_totals:
        wall_ms = sum(stage_totals.values())
        fps = {
            stage: (1000.0 * len(results) / ms if ms > 0 else None)
            for stage, ms in sorted(stage_totals.items())
        }
        fps["overall"] = 1000.0 * len(results) / wall_ms if wall_ms > 0 else None
        report["fps"] = fps
    return report
