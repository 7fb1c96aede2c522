"""Robust homography estimation: classic RANSAC and a sigma-marginalized variant.

Both run normalized 4-point DLT on minimal samples with symmetric transfer
error as the residual, and are exactly reproducible for a fixed (data,
params, seed) triple. Concurrent callers must use independent seeds; the
estimators never share RNG state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientMatchesError, NoModelError
from ..geometry import Homography, dlt_homography

# weights this small contribute no usable support across the sigma partitions
_MAGSAC_INLIER_WEIGHT = 0.25


@dataclass(frozen=True)
class RansacParams:
    threshold: float = 3.0
    confidence: float = 0.995
    max_iters: int = 2000
    seed: int = 0


@dataclass(frozen=True)
class MagsacParams:
    max_sigma: float = 10.0
    partitions: int = 10
    max_iters: int = 2000
    seed: int = 0


@dataclass(frozen=True)
class RobustFitResult:
    h: Homography
    inlier_mask: np.ndarray
    score: float
    iterations: int

    def __post_init__(self):
        mask = np.asarray(self.inlier_mask, dtype=bool)
        mask.flags.writeable = False
        object.__setattr__(self, "inlier_mask", mask)

    @property
    def n_inliers(self) -> int:
        return int(self.inlier_mask.sum())


def _prepare(src_pts, dst_pts) -> tuple[np.ndarray, np.ndarray]:
    src = np.asarray(src_pts, dtype=np.float64).reshape(-1, 2)
    dst = np.asarray(dst_pts, dtype=np.float64).reshape(-1, 2)
    if src.shape != dst.shape:
        raise ValueError(f"point arrays differ: {src.shape} vs {dst.shape}")
    if src.shape[0] < 4:
        raise InsufficientMatchesError(f"need >= 4 correspondences, got {src.shape[0]}")
    return src, dst


def _sample_degenerate(pts: np.ndarray, eps: float = 1e-8) -> bool:
    """True when any 3 of the 4 sample points are (nearly) collinear."""
    scale = max(float(np.abs(pts - pts.mean(axis=0)).max()), 1e-12)
    p = pts / scale
    for skip in range(4):
        q = np.delete(p, skip, axis=0)
        v1 = q[1] - q[0]
        v2 = q[2] - q[0]
        if abs(v1[0] * v2[1] - v1[1] * v2[0]) < eps:
            return True
    return False


def symmetric_transfer_error(h: Homography, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Per-correspondence sqrt(forward^2 + backward^2) transfer distance."""
    hm = h.m
    hi = np.linalg.inv(hm)

    def project(m, pts):
        w = pts @ m[2, :2] + m[2, 2]
        w = np.where(np.abs(w) < 1e-12, 1e-12, w)
        return (pts @ m[:2, :2].T + m[:2, 2]) / w[:, None]

    fwd = project(hm, src) - dst
    bwd = project(hi, dst) - src
    return np.sqrt((fwd**2).sum(axis=1) + (bwd**2).sum(axis=1))


def _minimal_fit(src, dst, idx) -> Homography | None:
    s, d = src[idx], dst[idx]
    if _sample_degenerate(s) or _sample_degenerate(d):
        return None
    try:
        return dlt_homography(s, d)
    except Exception:
        return None


def _adaptive_iters(inlier_ratio: float, confidence: float, current: int) -> int:
    if inlier_ratio <= 0.0:
        return current
    p_good = inlier_ratio**4
    if p_good >= 1.0:
        return 0
    denom = math.log(1.0 - p_good)
    if denom >= 0.0:
        return current
    return int(math.ceil(math.log(max(1.0 - confidence, 1e-12)) / denom))


def estimate_homography_ransac(
    src_pts, dst_pts, params: RansacParams | None = None
) -> RobustFitResult:
    """Classic RANSAC: maximize the inlier count at a fixed pixel threshold.

    Inliers are correspondences with symmetric transfer error below
    ``threshold``; the winning model is refit on all of them by least squares.
    The iteration budget shrinks adaptively as better consensus is found.
    """
    p = params or RansacParams()
    src, dst = _prepare(src_pts, dst_pts)
    n = src.shape[0]
    rng = np.random.default_rng(p.seed)

    best_mask: np.ndarray | None = None
    best_count = 0
    best_h: Homography | None = None
    needed = p.max_iters
    it = 0
    while it < min(p.max_iters, needed):
        it += 1
        idx = rng.choice(n, size=4, replace=False)
        h = _minimal_fit(src, dst, idx)
        if h is None:
            continue
        err = symmetric_transfer_error(h, src, dst)
        mask = err < p.threshold
        count = int(mask.sum())
        if count > best_count:
            best_count, best_mask, best_h = count, mask, h
            needed = _adaptive_iters(count / n, p.confidence, needed)
    if best_h is None or best_count < 4:
        raise NoModelError("no non-degenerate minimal sample produced a model")

    refit = _refit(src, dst, best_mask, best_h)
    err = symmetric_transfer_error(refit, src, dst)
    mask = err < p.threshold
    if mask.sum() < 4:  # refit drifted; keep the consensus model
        refit, mask = best_h, best_mask
    return RobustFitResult(refit, mask, float(mask.sum()), it)


def _refit(src, dst, mask, fallback: Homography, weights=None) -> Homography:
    if mask.sum() < 4:
        return fallback
    try:
        w = None if weights is None else weights[mask]
        return dlt_homography(src[mask], dst[mask], weights=w)
    except Exception:
        return fallback


def estimate_homography_magsac(
    src_pts, dst_pts, params: MagsacParams | None = None
) -> RobustFitResult:
    """Sigma-marginalized consensus: no single inlier threshold.

    Model quality averages truncated-quadratic inlier weights over
    ``partitions`` thresholds spanning (0, max_sigma]; the best model is refit
    by weighted least squares using each point's marginalized weight, and the
    reported inliers are the points with meaningful marginal weight. The full
    polynomial marginalization of MAGSAC is deliberately reduced to this
    fixed partition scheme.
    """
    p = params or MagsacParams()
    src, dst = _prepare(src_pts, dst_pts)
    n = src.shape[0]
    rng = np.random.default_rng(p.seed)
    sigmas = p.max_sigma * np.arange(1, p.partitions + 1) / p.partitions

    def marginal_weights(err: np.ndarray) -> np.ndarray:
        r = err[:, None] / sigmas[None, :]
        return np.clip(1.0 - r * r, 0.0, None).mean(axis=1)

    best_score = -1.0
    best_h: Homography | None = None
    needed = p.max_iters
    it = 0
    while it < min(p.max_iters, needed):
        it += 1
        idx = rng.choice(n, size=4, replace=False)
        h = _minimal_fit(src, dst, idx)
        if h is None:
            continue
        err = symmetric_transfer_error(h, src, dst)
        score = float(marginal_weights(err).sum())
        if score > best_score:
            best_score, best_h = score, h
            support = float((err < p.max_sigma).mean())
            needed = _adaptive_iters(support, 0.995, needed)
    if best_h is None:
        raise NoModelError("no non-degenerate minimal sample produced a model")

    h = best_h
    for _ in range(2):  # IRLS polish with marginalized weights
        err = symmetric_transfer_error(h, src, dst)
        w = marginal_weights(err)
        h = _refit(src, dst, w > 0.0, h, weights=w)
    err = symmetric_transfer_error(h, src, dst)
    w = marginal_weights(err)
    mask = w >= _MAGSAC_INLIER_WEIGHT
    if mask.sum() < 4:
        err = symmetric_transfer_error(best_h, src, dst)
        w = marginal_weights(err)
        h = best_h
        mask = w >= _MAGSAC_INLIER_WEIGHT
    return RobustFitResult(h, mask, float(w.sum()), it)
