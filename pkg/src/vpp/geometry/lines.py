"""Classical line-segment detection: Canny edges + probabilistic Hough.

Stands in for learned line detectors; externally produced lines can be
injected through the same JSON interchange format instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from skimage.feature import canny

from ..errors import FormatError, ImageTooSmallError
from ..imaging import ImageGray
from .core import LineSegment

_THETA_BINS = 180
_CORRIDOR_PX = 1.0


@dataclass(frozen=True)
class LineDetectParams:
    """Knobs for the Canny + Hough detector.

    Canny thresholds apply to gradient magnitude of the [0, 1]-normalized
    image. ``hough_threshold`` is raw accumulator votes; ``sample_cap`` bounds
    how many edge points vote (a seeded random subset is drawn above it).
    """

    canny_lo: float = 0.08
    canny_hi: float = 0.20
    hough_threshold: int = 40
    min_len: float = 20.0
    max_gap: float = 3.0
    sample_cap: int = 20000


def detect_line_segments(
    img: ImageGray, params: LineDetectParams | None = None, seed: int = 0
) -> list[LineSegment]:
    """Detect line segments of length >= min_len; deterministic for a fixed seed."""
    if img.width < 16 or img.height < 16:
        raise ImageTooSmallError(f"need at least 16x16, got {img.width}x{img.height}")
    p = params or LineDetectParams()
    edges = canny(
        img.data.astype(np.float64) / 255.0,
        sigma=1.4,
        low_threshold=p.canny_lo,
        high_threshold=p.canny_hi,
    )
    ys, xs = np.nonzero(edges)
    if xs.size == 0:
        return []
    if xs.size > p.sample_cap:
        keep = np.random.default_rng(seed).choice(xs.size, size=p.sample_cap, replace=False)
        keep.sort()
        xs, ys = xs[keep], ys[keep]
    return _hough_extract(xs.astype(np.float64), ys.astype(np.float64), img, p)


def _hough_extract(
    xs: np.ndarray, ys: np.ndarray, img: ImageGray, p: LineDetectParams
) -> list[LineSegment]:
    thetas = np.linspace(0.0, np.pi, _THETA_BINS, endpoint=False)
    cos_t = np.cos(thetas)
    sin_t = np.sin(thetas)
    diag = int(np.ceil(np.hypot(img.width, img.height)))
    n_rho = 2 * diag + 1

    def vote(px: np.ndarray, py: np.ndarray) -> np.ndarray:
        rho_idx = np.rint(px[:, None] * cos_t + py[:, None] * sin_t).astype(np.int64) + diag
        flat = np.arange(_THETA_BINS)[None, :] + rho_idx * _THETA_BINS
        return np.bincount(flat.ravel(), minlength=n_rho * _THETA_BINS).reshape(
            n_rho, _THETA_BINS
        )

    acc = vote(xs, ys)
    alive = np.ones(xs.size, dtype=bool)
    segments: list[LineSegment] = []
    for _ in range(10000):
        peak = int(acc.argmax())
        if acc.flat[peak] < p.hough_threshold:
            break
        rho = peak // _THETA_BINS - diag
        ti = peak % _THETA_BINS
        c, s = cos_t[ti], sin_t[ti]
        on_line = alive & (np.abs(xs * c + ys * s - rho) <= _CORRIDOR_PX)
        idx = np.nonzero(on_line)[0]
        if idx.size:
            # walk along the line direction, splitting at gaps > max_gap
            t = -xs[idx] * s + ys[idx] * c
            order = np.argsort(t, kind="stable")
            idx = idx[order]
            t = t[order]
            breaks = np.nonzero(np.diff(t) > p.max_gap)[0]
            for run in np.split(np.arange(idx.size), breaks + 1):
                if run.size < 2:
                    continue
                a, b = idx[run[0]], idx[run[-1]]
                if t[run[-1]] - t[run[0]] >= p.min_len:
                    segments.append(LineSegment((xs[a], ys[a]), (xs[b], ys[b])))
            alive[idx] = False
            acc -= vote(xs[idx], ys[idx])
        else:
            acc.flat[peak] = 0
        if not alive.any():
            break
    return segments


# --- JSON interchange: {"segments": [[x1, y1, x2, y2], ...]} ---


def load_line_segments(path: str | Path) -> list[LineSegment]:
    """Read segments from the JSON interchange format."""
    try:
        doc = json.loads(Path(path).read_text())
        return [LineSegment((s[0], s[1]), (s[2], s[3])) for s in doc["segments"]]
    except (KeyError, TypeError, IndexError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: invalid line-segment JSON: {exc}") from exc


def save_line_segments(segments: list[LineSegment], path: str | Path) -> None:
    doc = {
        "segments": [
            [float(s.p1[0]), float(s.p1[1]), float(s.p2[0]), float(s.p2[1])] for s in segments
        ]
    }
    Path(path).write_text(json.dumps(doc))
