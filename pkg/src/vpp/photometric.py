"""Ambient-light rendering: four ways to relight an ad against a background.

Each method maps (ad image, background image) -> relit ad image and is a
fixed point when ad == background. Statistics are taken over whatever
background image is passed in; callers wanting local ambience crop the
frame around the placement quad first (see :func:`crop_around_quad`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Quad
from .imaging import (
    Cdf,
    ImageGray,
    ImageLab,
    ImageRGB,
    compute_cdf,
    lab_from_rgb_flat,
    mean_luminance,
    rgb_from_lab_flat,
)


@dataclass(frozen=True)
class ChannelStats:
    mean: float
    std: float

    def __post_init__(self):
        if self.std < 0:
            raise ValueError("std must be >= 0")


_STATS_TILE = 1 << 16


def _stats(flat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-column population mean/std, accumulated tile-wise in float64
    (einsum: numpy's own axis-0 reductions here are an order of magnitude
    slower, and full-size float64 copies would thrash the allocator).
    Channels whose std is numerically indistinguishable from zero are
    reported as exactly zero."""
    n = len(flat)
    s1 = np.zeros(3)
    s2 = np.zeros(3)
    for i in range(0, n, _STATS_TILE):
        tile = flat[i : i + _STATS_TILE].astype(np.float64)
        s1 += np.einsum("ij->j", tile)
        s2 += np.einsum("ij,ij->j", tile, tile)
    mu = s1 / n
    sd = np.sqrt(np.maximum(s2 / n - mu * mu, 0.0))
    sd[sd < 1e-5 * (1.0 + np.abs(mu))] = 0.0
    return mu, sd


def lab_channel_stats(img: ImageLab) -> tuple[ChannelStats, ChannelStats, ChannelStats]:
    """Population mean/std of each LAB channel."""
    means, stds = _stats(img.data.reshape(-1, 3))
    return tuple(ChannelStats(float(m), float(s)) for m, s in zip(means, stds))


def match_brightness(ad: ImageRGB, background: ImageRGB, alpha: float = 1.0) -> ImageRGB:
    """Shift the ad so its mean luminance matches the background's.

    Applies g(x) = alpha * f(x) + beta per channel with beta chosen so the
    mean BT.601 luminance lands on the background's (shift-only at the
    default alpha = 1).
    """
    beta = mean_luminance(background) - alpha * mean_luminance(ad)
    out = ad.data.astype(np.float32)
    out *= np.float32(alpha)
    out += np.float32(beta)
    np.clip(out, 0.0, 255.0, out=out)
    np.rint(out, out=out)
    return ImageRGB(out.astype(np.uint8))


def transfer_channel_stats(
    ad: ImageLab, background: ImageLab, channels: tuple[int, ...] = (0, 1, 2)
) -> ImageLab:
    """Reinhard-style per-channel statistics transfer in the LAB domain.

    For each selected channel: out = (in - mean_ad) * (std_bg / std_ad) + mean_bg.
    A zero-variance ad channel collapses to the background mean; a
    zero-variance background channel passes through unchanged. Unselected
    channels are copied bit-identically. No gamut clamping happens here, so
    the output statistics equal the background's exactly.
    """
    scale, shift = _transfer_params(
        ad.data.reshape(-1, 3), background.data.reshape(-1, 3), channels
    )
    out = ad.data * scale
    out += shift
    return ImageLab(out)


def _transfer_params(
    ad_flat: np.ndarray, bg_flat: np.ndarray, channels: tuple[int, ...]
) -> tuple[np.ndarray, np.ndarray]:
    """Per-channel affine (scale, shift) so out = in * scale + shift."""
    mu_ad, sd_ad = _stats(ad_flat)
    mu_bg, sd_bg = _stats(bg_flat)
    scale = np.ones(3, dtype=np.float32)
    shift = np.zeros(3, dtype=np.float32)
    for c in channels:
        if sd_ad[c] == 0.0:
            scale[c], shift[c] = 0.0, mu_bg[c]
        elif sd_bg[c] == 0.0:
            continue
        else:
            scale[c] = sd_bg[c] / sd_ad[c]
            shift[c] = mu_bg[c] - mu_ad[c] * (sd_bg[c] / sd_ad[c])
    return scale, shift


def _transfer_rgb(ad: ImageRGB, background: ImageRGB, channels: tuple[int, ...]) -> ImageRGB:
    # raw flat buffers end to end: the transfer itself runs in place
    a = lab_from_rgb_flat(ad.data.reshape(-1, 3))
    b = lab_from_rgb_flat(background.data.reshape(-1, 3))
    scale, shift = _transfer_params(a, b, channels)
    a *= scale
    a += shift
    h, w = ad.data.shape[:2]
    return ImageRGB(rgb_from_lab_flat(a).reshape(h, w, 3))


def color_transfer(ad: ImageRGB, background: ImageRGB) -> ImageRGB:
    """Impose the background's LAB color statistics on the ad (all channels)."""
    return _transfer_rgb(ad, background, (0, 1, 2))


def lab_light_transfer(ad: ImageRGB, background: ImageRGB) -> ImageRGB:
    """Transfer only the L channel's statistics; a and b stay untouched."""
    return _transfer_rgb(ad, background, (0,))


def histogram_matching_lut(source: Cdf, target: Cdf) -> np.ndarray:
    """Monotone 256-entry map: v -> smallest u with target(u) >= source(v)."""
    lut = np.searchsorted(target.values, source.values, side="left")
    return np.minimum(lut, 255).astype(np.uint8)


def histogram_match(ad: ImageRGB, background: ImageRGB) -> ImageRGB:
    """Match each RGB channel's empirical CDF to the background's."""
    out = np.empty_like(ad.data)
    for c in range(3):
        src_cdf = compute_cdf(_channel(ad, c))
        dst_cdf = compute_cdf(_channel(background, c))
        out[..., c] = histogram_matching_lut(src_cdf, dst_cdf)[ad.data[..., c]]
    return ImageRGB(out)


def _channel(img: ImageRGB, c: int) -> ImageGray:
    return ImageGray(np.ascontiguousarray(img.data[..., c]))


def relight_none(ad: ImageRGB, background: ImageRGB) -> ImageRGB:
    return ad


LIGHT_METHODS = {
    "brightness": match_brightness,
    "color": color_transfer,
    "lab_light": lab_light_transfer,
    "histogram": histogram_match,
    "none": relight_none,
}


def crop_around_quad(frame: ImageRGB, quad: Quad, scale: float = 2.0) -> ImageRGB:
    """Crop the frame to ``scale`` times the quad's bbox, clipped to the frame.

    Used to localize background statistics to the ambience around the
    placement location instead of the whole frame.
    """
    xs = quad.corners[:, 0]
    ys = quad.corners[:, 1]
    cx, cy = (xs.min() + xs.max()) / 2.0, (ys.min() + ys.max()) / 2.0
    hw = (xs.max() - xs.min()) * scale / 2.0
    hh = (ys.max() - ys.min()) * scale / 2.0
    x0 = max(0, int(np.floor(cx - hw)))
    y0 = max(0, int(np.floor(cy - hh)))
    x1 = min(frame.width, int(np.ceil(cx + hw)) + 1)
    y1 = min(frame.height, int(np.ceil(cy + hh)) + 1)
    if x1 <= x0 or y1 <= y0:
        return frame
    return ImageRGB(frame.data[y0:y1, x0:x1].copy())
