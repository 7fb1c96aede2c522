"""Synthetic sequences and the tracking reprojection benchmark.

The benchmark mirrors the tracking evaluation protocol: per-frame placement
quads serve as pseudo ground truth, the frame-to-frame homography is
estimated from image features, and the error is how far the reversed
transform lands from the previous frame's quad. Synthetic sequences make
that protocol reproducible without any video data.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from ..errors import EmptySequenceError
from ..geometry import Quad
from ..imaging import ImageRGB, load_image, to_gray
from ..tracker import (
    describe,
    detect_keypoints,
    estimate_homography_magsac,
    estimate_homography_ransac,
    reprojection_error,
)
from .config import TrackerConfig
from .run import run_matcher


def make_textured_background(width: int, height: int, seed: int = 0) -> np.ndarray:
    """Busy indoor-ish backdrop: smooth base plus boxes and edges for corners."""
    rng = np.random.default_rng(seed)
    base = ndimage.gaussian_filter(rng.normal(size=(height, width)), sigma=12.0)
    base = (base - base.min()) / max(float(np.ptp(base)), 1e-9)
    img = (60.0 + 130.0 * base)[:, :, None] * np.array([1.0, 0.97, 0.92])

    for _ in range(max(30, width * height // 4000)):
        w = int(rng.integers(8, 40))
        h = int(rng.integers(8, 40))
        x = int(rng.integers(0, max(width - w, 1)))
        y = int(rng.integers(0, max(height - h, 1)))
        shade = rng.uniform(-70.0, 70.0)
        img[y : y + h, x : x + w] += shade
        img[y : y + h, x : x + w, rng.integers(0, 3)] += rng.uniform(-25.0, 25.0)
    return np.clip(img, 0, 255).astype(np.uint8)


@dataclass(frozen=True)
class SyntheticSequence:
    frames: list[ImageRGB]
    gt_quads: list[Quad | None]
    dx_per_frame: float


def make_translation_sequence(
    n_frames: int = 30,
    dx: int = 2,
    width: int = 512,
    height: int = 288,
    seed: int = 0,
) -> SyntheticSequence:
    """Sliding crops of one wide texture: pure integer translation per frame.

    Scene content moves by -dx pixels per frame in frame coordinates; the
    returned quads are the exact locations of one scene-fixed rectangle.
    """
    span = dx * (n_frames - 1)
    canvas = make_textured_background(width + span, height, seed)
    frames = [
        ImageRGB(canvas[:, t * dx : t * dx + width].copy()) for t in range(n_frames)
    ]
    # a quad pinned to the scene, placed so it stays inside every crop
    x0 = span + width * 0.15
    y0 = height * 0.25
    qw, qh = width * 0.3, height * 0.3
    gt = [
        Quad.from_bbox(x0 - t * dx, y0, qw, qh)
        for t in range(n_frames)
    ]
    return SyntheticSequence(frames, gt, float(dx))


# combos mirroring the reprojection benchmark table rows
DEFAULT_COMBOS = [
    ("fginn", "intersection", "ransac"),
    ("fginn", "intersection", "magsac"),
    ("fginn", "union", "ransac"),
    ("fginn", "union", "magsac"),
]
EXTRA_COMBOS = [
    ("bruteforce", None, "ransac"),
    ("mutual", None, "ransac"),
    ("mutual", None, "magsac"),
]


def bench_tracking(
    seq: SyntheticSequence,
    combos: list[tuple[str, str | None, str]] | None = None,
    noise_sigma: float = 0.5,
    seed: int = 0,
    base: TrackerConfig | None = None,
    trace_path: str | Path | None = None,
) -> list[dict]:
    """Mean reprojection error per (matcher, symmetry, estimator) combination.

    ``noise_sigma`` perturbs the pseudo-GT quad corners, standing in for the
    localization noise of a placement model whose predictions are used as
    ground truth. Frames whose quad is None are skipped pairwise.
    """
    combos = combos if combos is not None else DEFAULT_COMBOS
    base = base or TrackerConfig()
    rng = np.random.default_rng(seed)
    noisy = [
        q if q is None else Quad(q.corners + rng.normal(0.0, noise_sigma, size=(4, 2)))
        for q in seq.gt_quads
    ]

    feats = []
    sizes = []
    for frame in seq.frames:
        gray = to_gray(frame)
        kps = detect_keypoints(gray, base.fast)
        kps, descs = describe(gray, kps)
        feats.append((kps, descs))
        sizes.append((frame.width, frame.height))

    trace_fh = open(trace_path, "w") if trace_path else None
    rows = []
    try:
        for matcher, symmetric, estimator in combos:
            tc = dataclasses.replace(base, matcher=matcher, symmetric=symmetric, estimator=estimator)
            errors = []
            n_matches = []
            n_inliers = []
            failures = 0
            for t in range(1, len(seq.frames)):
                if noisy[t - 1] is None or noisy[t] is None:
                    continue
                qkps, qd = feats[t - 1]
                tkps, td = feats[t]
                matches = run_matcher(tc, qkps, qd, tkps, td, sizes[t - 1], sizes[t])
                n_matches.append(len(matches))
                record = {
                    "frame": t,
                    "quad": noisy[t].to_list(),
                    "n_matches": len(matches),
                    "n_inliers": None,
                    "reproj_error": None,
                    "method": f"fast_brief/{matcher}"
                    + (f"_{symmetric}" if symmetric else "")
                    + f"/{estimator}",
                }
                if len(matches) < 4:
                    failures += 1
                else:
                    src = np.array([(qkps[m.query_idx].x, qkps[m.query_idx].y) for m in matches])
                    dst = np.array([(tkps[m.train_idx].x, tkps[m.train_idx].y) for m in matches])
                    try:
                        if estimator == "ransac":
                            fit = estimate_homography_ransac(
                                src, dst, dataclasses.replace(tc.ransac, seed=tc.ransac.seed + t)
                            )
                        else:
                            fit = estimate_homography_magsac(
                                src, dst, dataclasses.replace(tc.magsac, seed=tc.magsac.seed + t)
                            )
                        err = reprojection_error(fit.h, noisy[t - 1], noisy[t])
                        errors.append(err)
                        n_inliers.append(fit.n_inliers)
                        record["n_inliers"] = fit.n_inliers
                        record["reproj_error"] = err
                    except Exception:
                        failures += 1
                if trace_fh:
                    trace_fh.write(json.dumps(record, sort_keys=True) + "\n")
            rows.append(
                {
                    "detection": "fast_brief",
                    "matching": matcher + (f"_sym_{symmetric}" if symmetric else ""),
                    "outlier_filter": estimator,
                    "reproj_error": float(np.mean(errors)) if errors else None,
                    "mean_matches": float(np.mean(n_matches)) if n_matches else 0.0,
                    "mean_inliers": float(np.mean(n_inliers)) if n_inliers else 0.0,
                    "failures": failures,
                }
            )
    finally:
        if trace_fh:
            trace_fh.close()
    return rows


def sequence_from_config(config) -> SyntheticSequence:
    """Build a benchmark sequence from configured frames and their artifacts.

    The pseudo ground truth is the per-frame detection of the placement quad
    (the tracking benchmark treats the placement model's outputs as truth);
    frames without wall/plane artifacts carry no quad and are skipped pairwise.
    """
    from .artifacts import load_frame_artifacts
    from .run import _detect_quad, list_frames

    frames = []
    quads = []
    for idx, path in enumerate(list_frames(config.frames_dir)):
        frame = load_image(path)
        art = load_frame_artifacts(config.artifacts_dir, path.stem, (frame.width, frame.height))
        gray = to_gray(frame)
        frames.append(frame)
        quads.append(_detect_quad(config, idx, frame, gray, art))
    n_quads = sum(1 for q in quads if q is not None)
    if n_quads < 2:
        raise EmptySequenceError(
            "benchmark needs placement quads on at least 2 frames; provide wall/plane artifacts"
        )
    return SyntheticSequence(frames, quads, 0.0)


def format_bench_table(rows: list[dict]) -> str:
    header = f"{'Matching':<28} {'Outlier filter':<14} {'Reproj error':>12} {'Matches':>9} {'Inliers':>9}"
    lines = [header, "-" * len(header)]
    for r in rows:
        err = "n/a" if r["reproj_error"] is None else f"{r['reproj_error']:.3f}"
        lines.append(
            f"{r['matching']:<28} {r['outlier_filter']:<14} {err:>12}"
            f" {r['mean_matches']:>9.1f} {r['mean_inliers']:>9.1f}"
        )
    return "\n".join(lines)
