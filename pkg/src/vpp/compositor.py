"""Warp the relit ad into the placement quad and composite behind occluders."""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError
from .geometry import Quad, homography_from_quads
from .imaging import BinaryMask, ImageRGB


def ad_rect_quad(ad: ImageRGB) -> Quad:
    """Pixel-center rectangle of the ad image, in TL, TR, BR, BL order."""
    w, h = ad.width, ad.height
    return Quad.from_bbox(0.0, 0.0, float(w - 1), float(h - 1))


def warp_ad(
    ad: ImageRGB, dst: Quad, frame_size: tuple[int, int]
) -> tuple[ImageRGB, BinaryMask]:
    """Inverse-mapped bilinear warp of the ad onto ``dst`` within a frame.

    Every frame pixel inside ``dst`` samples the ad at H^-1 * pixel, where H
    maps the ad rectangle onto ``dst``. Returns the warped layer (zeros
    outside) and its coverage mask, clipped to the frame; no out-of-bounds
    sampling occurs for partially off-frame quads.
    """
    frame_w, frame_h = frame_size
    h_inv = homography_from_quads(ad_rect_quad(ad), dst).inverse()

    xs = dst.corners[:, 0]
    ys = dst.corners[:, 1]
    x0 = max(0, int(np.floor(xs.min())))
    y0 = max(0, int(np.floor(ys.min())))
    x1 = min(frame_w - 1, int(np.ceil(xs.max())))
    y1 = min(frame_h - 1, int(np.ceil(ys.max())))

    layer = np.zeros((frame_h, frame_w, 3), dtype=np.uint8)
    mask = np.zeros((frame_h, frame_w), dtype=bool)
    if x1 < x0 or y1 < y0:
        return ImageRGB(layer), BinaryMask(mask)

    gx, gy = np.meshgrid(np.arange(x0, x1 + 1), np.arange(y0, y1 + 1))
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1).astype(np.float64)
    w = pts @ h_inv.m[2, :2] + h_inv.m[2, 2]
    src = (pts @ h_inv.m[:2, :2].T + h_inv.m[:2, 2]) / w[:, None]
    sx, sy = src[:, 0], src[:, 1]

    eps = 1e-6
    inside = (
        (np.abs(w) > 1e-12)
        & (sx >= -eps)
        & (sx <= ad.width - 1 + eps)
        & (sy >= -eps)
        & (sy <= ad.height - 1 + eps)
    )
    if not inside.any():
        return ImageRGB(layer), BinaryMask(mask)

    sx = np.clip(sx[inside], 0.0, ad.width - 1.0)
    sy = np.clip(sy[inside], 0.0, ad.height - 1.0)
    ix = np.clip(np.floor(sx).astype(np.intp), 0, max(ad.width - 2, 0))
    iy = np.clip(np.floor(sy).astype(np.intp), 0, max(ad.height - 2, 0))
    fx = (sx - ix)[:, None]
    fy = (sy - iy)[:, None]

    data = ad.data.astype(np.float64)
    ix1 = np.minimum(ix + 1, ad.width - 1)
    iy1 = np.minimum(iy + 1, ad.height - 1)
    top = data[iy, ix] * (1.0 - fx) + data[iy, ix1] * fx
    bot = data[iy1, ix] * (1.0 - fx) + data[iy1, ix1] * fx
    sampled = np.rint(top * (1.0 - fy) + bot * fy).astype(np.uint8)

    flat_idx = np.nonzero(inside)[0]
    rows = gy.ravel()[flat_idx]
    cols = gx.ravel()[flat_idx]
    layer[rows, cols] = sampled
    mask[rows, cols] = True
    return ImageRGB(layer), BinaryMask(mask)


def composite(
    frame: ImageRGB, ad_layer: ImageRGB, ad_mask: BinaryMask, occlusion: BinaryMask
) -> ImageRGB:
    """Paint the ad layer where its mask is set and no occluder covers it.

    Pixels outside ``ad_mask`` (and all occluded pixels) are byte-identical to
    the input frame.
    """
    for other in (ad_layer.data.shape[:2], ad_mask.bits.shape, occlusion.bits.shape):
        if other != frame.data.shape[:2]:
            raise DimensionMismatchError(f"layer/mask {other} vs frame {frame.data.shape[:2]}")
    visible = ad_mask.bits & ~occlusion.bits
    return ImageRGB(np.where(visible[:, :, None], ad_layer.data, frame.data))
