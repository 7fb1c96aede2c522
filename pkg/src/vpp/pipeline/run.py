"""End-to-end frame loop: gate, detect-or-track, relight, composite, write.

The detect-or-track decision and tracking itself form a sequential spine in
frame order (frame t needs t-1); per-frame failures are recorded on the
result and never abort the run. Frames that fail the scene gate are copied
to the output byte-identical.
"""

from __future__ import annotations

import dataclasses
import json
import math
import shutil
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..compositor import composite, warp_ad
from ..errors import (
    DegenerateOutputError,
    DegenerateTrackError,
    EmptySequenceError,
    InsufficientMatchesError,
    NoModelError,
    VppError,
)
from ..geometry import Quad, detect_line_segments
from ..imaging import BinaryMask, ImageGray, dilate, load_image, save_image, to_gray
from ..photometric import LIGHT_METHODS, crop_around_quad, match_brightness
from ..regions import align_region, empty_space_mask, propose_regions, select_plane_id
from ..scene import classify_scene
from ..tracker import (
    describe,
    detect_keypoints,
    estimate_homography_magsac,
    estimate_homography_ransac,
    filter_gms,
    filter_keypoints_by_mask,
    match_bruteforce,
    match_fginn,
    match_mutual_nn,
    match_symmetric,
    track_quad,
)
from .artifacts import FrameArtifacts, load_frame_artifacts
from .config import PipelineConfig, TrackerConfig
from .metrics import quad_iou, report_metrics

FRAME_SUFFIXES = (".png", ".ppm")


@dataclass
class FrameResult:
    """Per-frame outcome; ``timing`` holds per-stage milliseconds."""

    frame: int
    stem: str
    is_kitchen: bool
    quad: Quad | None = None
    method: dict = field(default_factory=dict)
    n_matches: int | None = None
    n_inliers: int | None = None
    reproj_error: float | None = None
    error: str | None = None
    timing: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.quad is not None and not self.is_kitchen:
            raise ValueError("a placement quad requires a kitchen frame")

    def to_record(self) -> dict:
        """Deterministic serialization: wall-clock timings are kept out of it."""
        return {
            "frame": self.frame,
            "stem": self.stem,
            "is_kitchen": self.is_kitchen,
            "quad": self.quad.to_list() if self.quad else None,
            "method": self.method,
            "n_matches": self.n_matches,
            "n_inliers": self.n_inliers,
            "reproj_error": self.reproj_error,
            "error": self.error,
        }


class _Stopwatch:
    """Contiguous lap timing so per-stage times sum to the loop's wall time."""

    def __init__(self):
        self._last = time.perf_counter()
        self.laps: dict[str, float] = {}

    def lap(self, name: str) -> None:
        now = time.perf_counter()
        self.laps[name] = self.laps.get(name, 0.0) + (now - self._last) * 1000.0
        self._last = now


@dataclass
class _TrackState:
    """Sequential spine: placement quad plus the previous frame's features."""

    quad: Quad | None = None
    last_detect_idx: int | None = None
    prev_idx: int | None = None
    prev_kps: list = field(default_factory=list)
    prev_descs: list = field(default_factory=list)
    prev_size: tuple[int, int] | None = None


def list_frames(frames_dir: Path) -> list[Path]:
    frames = sorted(
        p for p in frames_dir.iterdir() if p.suffix.lower() in FRAME_SUFFIXES and p.is_file()
    )
    if not frames:
        raise EmptySequenceError(f"no {'/'.join(FRAME_SUFFIXES)} frames in {frames_dir}")
    return frames


def run_pipeline(config: PipelineConfig) -> list[FrameResult]:
    """Process the configured frame sequence; returns per-frame results.

    Writes numbered frames, ``results.jsonl``, ``timings.jsonl``, and
    ``metrics.json`` into the output directory. Rendered frames and
    results.jsonl are byte-identical across runs for a fixed config and seed;
    the timing files hold wall-clock measurements and are not.
    """
    config.validate_paths()
    frames = list_frames(config.frames_dir)
    ad = load_image(config.ad_path)
    config.output_dir.mkdir(parents=True, exist_ok=True)

    state = _TrackState()
    results: list[FrameResult] = []
    for idx, path in enumerate(frames):
        sw = _Stopwatch()
        res = FrameResult(frame=idx, stem=path.stem, is_kitchen=True)
        res.method = {
            "light": config.light_method,
            "matcher": _matcher_tag(config.tracker),
            "estimator": config.tracker.estimator,
        }
        out_path = config.output_dir / f"{idx:06d}{path.suffix.lower()}"
        kps: list = []
        descs: list = []
        size: tuple[int, int] | None = None
        try:
            kps, descs, size = _process_frame(config, idx, path, out_path, ad, state, res, sw)
        except VppError as exc:
            res.error = f"{type(exc).__name__}: {exc}"
            if res.is_kitchen:
                res.quad = state.quad
            if not out_path.exists():
                shutil.copyfile(path, out_path)
            sw.lap("error")
        res.timing = sw.laps
        results.append(res)
        if res.is_kitchen and size is not None:
            state.prev_kps, state.prev_descs = kps, descs
            state.prev_idx = idx
            state.prev_size = size
        else:
            state.prev_idx = None  # broken chain: next frame must re-detect

    _write_outputs(config.output_dir, results)
    return results


def _process_frame(config, idx, path, out_path, ad, state: _TrackState, res: FrameResult, sw):
    frame = load_image(path)
    size = (frame.width, frame.height)
    art = load_frame_artifacts(config.artifacts_dir, path.stem, size)
    sw.lap("load")

    if art.detections is not None:
        res.is_kitchen = classify_scene(art.detections, config.scene_rule).is_kitchen
    sw.lap("scene")
    if not res.is_kitchen:
        shutil.copyfile(path, out_path)
        sw.lap("write")
        return [], [], None

    gray = to_gray(frame)
    if art.features is not None:
        kps, descs = art.features
    else:
        kps = detect_keypoints(gray, config.tracker.fast)
        kps, descs = describe(gray, kps)
    if art.human is not None:
        kps, descs = filter_keypoints_by_mask(kps, descs, art.human, config.tracker.mask_margin)
    sw.lap("features")

    tracked = False
    if state.quad is not None and state.prev_idx == idx - 1 and state.prev_kps and kps:
        tracked = _track_step(config, idx, res, state, kps, descs, size)
        if tracked:
            state.quad = res.quad
    sw.lap("track")

    due = state.last_detect_idx is None or idx - state.last_detect_idx >= config.redetect_interval
    if due or not tracked:
        fresh = _detect_quad(config, idx, frame, gray, art)
        if fresh is not None:
            state.last_detect_idx = idx
            if not tracked:
                state.quad = fresh
            else:
                try:
                    if quad_iou(state.quad, fresh) < config.redetect_iou:
                        state.quad = fresh
                except VppError:
                    state.quad = fresh
    res.quad = state.quad
    sw.lap("detect")

    if state.quad is None:
        shutil.copyfile(path, out_path)
        sw.lap("write")
        return kps, descs, size

    background = frame
    if config.light_stats_scope == "local":
        background = crop_around_quad(frame, state.quad)
    if config.light_method == "brightness":
        relit = match_brightness(ad, background, config.light_alpha)
    else:
        relit = LIGHT_METHODS[config.light_method](ad, background)
    sw.lap("relight")

    layer, ad_mask = warp_ad(relit, state.quad, size)
    if art.human is not None:
        occlusion = dilate(art.human, config.occlusion_dilate)
    else:
        occlusion = BinaryMask(np.zeros((frame.height, frame.width), dtype=bool))
    rendered = composite(frame, layer, ad_mask, occlusion)
    sw.lap("composite")

    save_image(rendered, out_path)
    sw.lap("write")
    return kps, descs, size


def _matcher_tag(tc: TrackerConfig) -> str:
    tag = tc.matcher
    if tc.symmetric:
        tag = f"sym_{tag}_{tc.symmetric}"
    if tc.use_gms:
        tag += "+gms"
    return tag


def _track_step(config, idx, res: FrameResult, state: _TrackState, kps, descs, size) -> bool:
    """Match prev->curr features, fit a homography, and propagate the quad."""
    tc = config.tracker
    try:
        matches = run_matcher(
            tc, state.prev_kps, state.prev_descs, kps, descs, state.prev_size, size
        )
        res.n_matches = len(matches)
        if len(matches) < 4:
            res.error = f"too few matches ({len(matches)})"
            return False
        src = np.array(
            [(state.prev_kps[m.query_idx].x, state.prev_kps[m.query_idx].y) for m in matches]
        )
        dst = np.array([(kps[m.train_idx].x, kps[m.train_idx].y) for m in matches])
        if tc.estimator == "ransac":
            fit = estimate_homography_ransac(
                src, dst, dataclasses.replace(tc.ransac, seed=tc.ransac.seed + idx)
            )
        else:
            fit = estimate_homography_magsac(
                src, dst, dataclasses.replace(tc.magsac, seed=tc.magsac.seed + idx)
            )
        res.n_inliers = fit.n_inliers
        res.quad = track_quad(state.quad, fit.h)
        return True
    except (InsufficientMatchesError, NoModelError, DegenerateTrackError) as exc:
        res.error = f"{type(exc).__name__}: {exc}"
        return False


def run_matcher(tc: TrackerConfig, qkps, qd, tkps, td, qsize, tsize):
    """Dispatch the configured matcher (+ optional symmetry and GMS filtering)."""
    if not qd or not td:
        return []

    def one_way(a_kps, a_d, b_kps, b_d):
        if tc.matcher == "bruteforce":
            return match_bruteforce(a_d, b_d)
        if tc.matcher == "mutual":
            return match_mutual_nn(a_d, b_d)
        return match_fginn(a_kps, a_d, b_kps, b_d, tc.fginn_ratio, tc.fginn_min_geom_dist)

    matches = one_way(qkps, qd, tkps, td)
    if tc.symmetric:
        backward = one_way(tkps, td, qkps, qd)
        matches = match_symmetric(tc.symmetric, matches, backward)
    if tc.use_gms and matches:
        matches = filter_gms(qkps, tkps, matches, qsize, tsize, grid=tc.gms_grid)
    return matches


def _detect_quad(config, idx, frame, gray: ImageGray, art: FrameArtifacts) -> Quad | None:
    """Propose and perspective-align a placement quad from wall/plane artifacts."""
    if art.wall is None:
        return None
    if art.plane is not None:
        plane_id = select_plane_id(art.wall, art.plane)
        if plane_id == 0:
            return None
        mask = empty_space_mask(art.wall, art.plane, plane_id)
    else:
        mask = art.wall  # no plane map: treat the wall as a single plane
    r = config.region
    min_area = max(1, int(r.min_area_frac * frame.width * frame.height))
    proposals = propose_regions(mask, min_area, r.min_fill, r.min_aspect, r.max_aspect)
    if not proposals:
        return None
    best = proposals[0]
    if art.lines is not None:
        lines = art.lines
    else:
        lines = detect_line_segments(gray, config.lines, seed=config.seed + idx)
    x, y, w, h = best.bbox
    budget = config.align.budget_diag_factor * math.hypot(w, h)
    try:
        return align_region(best, lines, config.align.angle_tol, budget, config.align.distance_mode)
    except DegenerateOutputError:
        return Quad.from_bbox(*best.bbox)


def _write_outputs(output_dir: Path, results: list[FrameResult]) -> None:
    with (output_dir / "results.jsonl").open("w") as fh:
        for res in results:
            fh.write(json.dumps(res.to_record(), sort_keys=True) + "\n")
    with (output_dir / "timings.jsonl").open("w") as fh:
        for res in results:
            fh.write(json.dumps({"frame": res.frame, "ms": res.timing}, sort_keys=True) + "\n")
    report = report_metrics(results)
    (output_dir / "metrics.json").write_text(json.dumps(report, indent=2, sort_keys=True))
