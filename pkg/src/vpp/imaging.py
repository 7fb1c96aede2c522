"""Raster image types, color-space conversion, CDF utilities, and file I/O.

Everything downstream (region proposal, relighting, compositing, tracking)
operates on the dense types defined here. All types are immutable after
construction and all functions are pure, so they are safe to use from
concurrent workers.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

from .errors import DimensionMismatchError, EmptyImageError, FormatError

# ITU-R BT.601 luma weights, the common CV-library default.
_LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

# sRGB (D65) <-> CIEXYZ. Row sums of the forward matrix reproduce the
# D65 white point, so white maps to L=100, a=b~0 without extra scaling.
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)
_WHITE_POINT = np.array([0.95047, 1.00000, 1.08883])

# The hot conversion path runs in float32 with the white point and the LAB
# channel assembly folded into single matmuls.
_RGB_TO_XYZN = (_RGB_TO_XYZ / _WHITE_POINT[:, None]).astype(np.float32)
_XYZN_TO_RGB = (_XYZ_TO_RGB * _WHITE_POINT[None, :]).astype(np.float32)
# (fx, fy, fz) -> (L, a, b) is affine: L = 116 fy - 16, a = 500 (fx - fy), b = 200 (fy - fz)
_F_TO_LAB = np.array(
    [[0.0, 116.0, 0.0], [500.0, -500.0, 0.0], [0.0, 200.0, -200.0]], dtype=np.float32
)
_LAB_TO_F = np.linalg.inv(_F_TO_LAB.astype(np.float64)).astype(np.float32)
_LAB_OFFSET = np.array([-16.0, 0.0, 0.0], dtype=np.float32)
_F_OFFSET = np.float32(16.0 / 116.0)

# Precomputed sRGB gamma expansion for all 256 code values.
_SRGB_TO_LINEAR_LUT = np.empty(256, dtype=np.float32)
_s = np.arange(256) / 255.0
_SRGB_TO_LINEAR_LUT[:] = np.where(_s <= 0.04045, _s / 12.92, ((_s + 0.055) / 1.055) ** 2.4)
del _s

_LAB_EPS = np.float32((6.0 / 29.0) ** 3)
_LAB_F_EPS = np.float32(6.0 / 29.0)
_LAB_KAPPA = np.float32(3.0 * (6.0 / 29.0) ** 2)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ImageRGB:
    """8-bit RGB raster; ``data`` is a read-only (height, width, 3) uint8 array."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 3 or arr.shape[2] != 3 or arr.dtype != np.uint8:
            raise FormatError(f"ImageRGB expects (H, W, 3) uint8, got {arr.shape} {arr.dtype}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise EmptyImageError("image must be at least 1x1")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class ImageGray:
    """8-bit luminance raster; ``data`` is a read-only (height, width) uint8 array."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2 or arr.dtype != np.uint8:
            raise FormatError(f"ImageGray expects (H, W) uint8, got {arr.shape} {arr.dtype}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise EmptyImageError("image must be at least 1x1")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class ImageLab:
    """CIELAB raster, float32 (height, width, 3) with channels (L, a, b).

    Nominal ranges are L in [0, 100] and a, b in [-128, 127]; values outside
    those ranges are accepted (statistical transfer and deliberate out-of-gamut
    inputs produce them) and are clamped only on conversion back to RGB.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float32)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise FormatError(f"ImageLab expects (H, W, 3) floats, got {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise EmptyImageError("image must be at least 1x1")
        # a single non-finite value poisons the sum, so this check is O(N) cheap
        if not np.isfinite(arr.sum(dtype=np.float64)):
            raise FormatError("ImageLab values must be finite")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class BinaryMask:
    """Per-pixel boolean mask; True marks foreground/selected pixels."""

    bits: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.bits)
        if arr.ndim != 2 or arr.dtype != np.bool_:
            raise FormatError(f"BinaryMask expects (H, W) bool, got {arr.shape} {arr.dtype}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise EmptyImageError("mask must be at least 1x1")
        object.__setattr__(self, "bits", _freeze(arr))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    def check_matches(self, width: int, height: int) -> None:
        if (self.width, self.height) != (width, height):
            raise DimensionMismatchError(
                f"mask is {self.width}x{self.height}, frame is {width}x{height}"
            )


@dataclass(frozen=True)
class Cdf:
    """Empirical cumulative distribution over the 256 gray levels.

    ``values[k]`` is the fraction of pixels with value <= k; monotone
    non-decreasing with ``values[255] == 1.0`` exactly.
    """

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.shape != (256,):
            raise FormatError(f"Cdf expects 256 values, got shape {arr.shape}")
        if np.any(np.diff(arr) < 0):
            raise FormatError("Cdf must be monotone non-decreasing")
        if arr[255] != 1.0:
            raise FormatError("Cdf must end at exactly 1.0")
        object.__setattr__(self, "values", _freeze(arr))


# --- conversions ---


def to_gray(img: ImageRGB) -> ImageGray:
    """Collapse RGB to luminance with BT.601 weights (0.299, 0.587, 0.114)."""
    y = img.data.astype(np.float64) @ _LUMA_WEIGHTS
    return ImageGray(np.rint(y).astype(np.uint8))


def mean_luminance(img: ImageRGB) -> float:
    """Mean BT.601 luminance without quantizing to 8 bits.

    Computed exactly from the per-channel histograms, which is far cheaper
    than materializing a float luminance plane.
    """
    flat = img.data.reshape(-1, 3)
    levels = np.arange(256)
    sums = [np.bincount(flat[:, c], minlength=256) @ levels for c in range(3)]
    return float(np.dot(_LUMA_WEIGHTS, sums) / len(flat))


# The converters tile their work so every temporary stays small enough to be
# cache- and heap-resident; full-image float temporaries would otherwise
# dominate the runtime through allocator traffic.
_TILE = 1 << 16  # pixels


def lab_from_rgb_flat(data: np.ndarray) -> np.ndarray:
    """(N, 3) uint8 sRGB -> writable (N, 3) float32 CIELAB."""
    n = len(data)
    out = np.empty((n, 3), dtype=np.float32)
    k = min(_TILE, n)
    linear = np.empty((k, 3), dtype=np.float32)
    xyz = np.empty((k, 3), dtype=np.float32)
    for i in range(0, n, _TILE):
        j = min(i + _TILE, n)
        lin = linear[: j - i]
        xz = xyz[: j - i]
        np.take(_SRGB_TO_LINEAR_LUT, data[i:j], out=lin)
        np.matmul(lin, _RGB_TO_XYZN.T, out=xz)
        small = xz < _LAB_EPS
        np.cbrt(xz, out=xz)
        if small.any():
            fs = xz[small]
            xz[small] = fs * fs * fs / _LAB_KAPPA + _F_OFFSET
        np.matmul(xz, _F_TO_LAB.T, out=out[i:j])
        out[i:j] += _LAB_OFFSET
    return out


def rgb_from_lab_flat(lab: np.ndarray) -> np.ndarray:
    """(N, 3) float32 CIELAB -> (N, 3) uint8 sRGB, out-of-gamut clamped."""
    n = len(lab)
    out = np.empty((n, 3), dtype=np.uint8)
    k = min(_TILE, n)
    f = np.empty((k, 3), dtype=np.float32)
    xyz = np.empty((k, 3), dtype=np.float32)
    for i in range(0, n, _TILE):
        j = min(i + _TILE, n)
        fb = f[: j - i]
        xz = xyz[: j - i]
        np.matmul(lab[i:j], _LAB_TO_F.T, out=fb)
        fb += _F_OFFSET
        np.multiply(fb, fb, out=xz)
        xz *= fb
        small = fb < _LAB_F_EPS
        if small.any():
            xz[small] = _LAB_KAPPA * (fb[small] - _F_OFFSET)
        np.matmul(xz, _XYZN_TO_RGB.T, out=fb)
        np.clip(fb, np.float32(0.0), None, out=fb)
        dark = fb <= np.float32(0.0031308)
        dark_vals = np.float32(12.92) * fb[dark]
        np.power(fb, np.float32(1.0 / 2.4), out=fb)
        fb *= np.float32(1.055)
        fb -= np.float32(0.055)
        fb[dark] = dark_vals
        fb *= np.float32(255.0)
        np.rint(fb, out=fb)
        np.clip(fb, 0.0, 255.0, out=fb)
        out[i:j] = fb  # rint left integral values, so the cast is exact
    return out


def rgb_to_lab(img: ImageRGB) -> ImageLab:
    """Per-pixel sRGB (D65) to CIELAB conversion."""
    h, w = img.data.shape[:2]
    return ImageLab(lab_from_rgb_flat(img.data.reshape(-1, 3)).reshape(h, w, 3))


def lab_to_rgb(img: ImageLab) -> ImageRGB:
    """CIELAB back to 8-bit sRGB, clamping out-of-gamut values to [0, 255]."""
    h, w = img.data.shape[:2]
    return ImageRGB(rgb_from_lab_flat(img.data.reshape(-1, 3)).reshape(h, w, 3))


def compute_cdf(img: ImageGray) -> Cdf:
    """Normalized cumulative histogram: values[k] = (#pixels <= k) / N."""
    counts = np.bincount(img.data.ravel(), minlength=256)
    return Cdf(np.cumsum(counts) / img.data.size)


def dilate(mask: BinaryMask, radius: int) -> BinaryMask:
    """Chebyshev dilation: output true wherever input is true within ``radius``."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius == 0:
        return mask
    out = ndimage.maximum_filter(mask.bits, size=2 * radius + 1, mode="constant", cval=False)
    return BinaryMask(out)


# --- file I/O ---
#
# Supported on disk: 8-bit PNG (RGB, grayscale, or palette) and binary PPM
# (P6, maxval 255). Masks are 8-bit grayscale PNG where 0 = false and any
# nonzero value loads as true. 16-bit sources are rejected, never truncated.

_REJECTED_PNG_MODES = {"I", "I;16", "I;16B", "I;16L", "I;16N", "F"}


def load_image(path: str | Path) -> ImageRGB:
    """Decode a PNG or binary PPM file pixel-exactly into an ImageRGB."""
    raw = Path(path).read_bytes()
    if raw[:2] == b"P6":
        return _decode_ppm(raw)
    if raw[:8] == b"\x89PNG\r\n\x1a\n":
        return _decode_png(raw)
    raise FormatError(f"{path}: not a PNG or binary PPM file")


def _decode_png(raw: bytes) -> ImageRGB:
    try:
        img = Image.open(io.BytesIO(raw))
        img.load()
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise FormatError(f"malformed PNG: {exc}") from exc
    if img.mode in _REJECTED_PNG_MODES:
        raise FormatError(f"16-bit/float PNG not supported (mode {img.mode})")
    if img.mode == "P":
        img = img.convert("RGB")
    if img.mode == "L":
        arr = np.asarray(img, dtype=np.uint8)
        return ImageRGB(np.repeat(arr[:, :, None], 3, axis=2))
    if img.mode == "RGB":
        return ImageRGB(np.asarray(img, dtype=np.uint8).copy())
    raise FormatError(f"unsupported PNG mode {img.mode} (need 8-bit RGB or grayscale)")


def _decode_ppm(raw: bytes) -> ImageRGB:
    pos = 2
    fields = []
    while len(fields) < 3:
        if pos >= len(raw):
            raise FormatError("truncated PPM header")
        c = raw[pos : pos + 1]
        if c == b"#":
            pos = raw.find(b"\n", pos)
            if pos < 0:
                raise FormatError("truncated PPM header")
            continue
        if c.isspace():
            pos += 1
            continue
        end = pos
        while end < len(raw) and not raw[end : end + 1].isspace():
            end += 1
        fields.append(raw[pos:end])
        pos = end
    try:
        width, height, maxval = (int(f) for f in fields)
    except ValueError as exc:
        raise FormatError("non-numeric PPM header field") from exc
    if width < 1 or height < 1:
        raise FormatError("PPM dimensions must be positive")
    if maxval > 255:
        raise FormatError(f"16-bit PPM not supported (maxval {maxval})")
    if maxval < 1:
        raise FormatError(f"invalid PPM maxval {maxval}")
    pos += 1  # single whitespace byte after maxval
    data = raw[pos : pos + width * height * 3]
    if len(data) != width * height * 3:
        raise FormatError("truncated PPM pixel data")
    return ImageRGB(np.frombuffer(data, dtype=np.uint8).reshape(height, width, 3).copy())


def save_image(img: ImageRGB, path: str | Path) -> None:
    """Write PNG or binary PPM depending on the file extension."""
    path = Path(path)
    if path.suffix.lower() == ".ppm":
        header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
        path.write_bytes(header + img.data.tobytes())
    elif path.suffix.lower() == ".png":
        Image.fromarray(img.data).save(path, format="PNG")
    else:
        raise FormatError(f"unsupported output extension {path.suffix!r} (use .png or .ppm)")


def save_gray(img: ImageGray, path: str | Path) -> None:
    """Write an 8-bit grayscale PNG."""
    Image.fromarray(img.data).save(Path(path), format="PNG")


def load_gray(path: str | Path) -> ImageGray:
    """Load a raster and collapse to 8-bit luminance."""
    raw = Path(path).read_bytes()
    if raw[:8] == b"\x89PNG\r\n\x1a\n":
        try:
            img = Image.open(io.BytesIO(raw))
            img.load()
        except (UnidentifiedImageError, OSError, SyntaxError) as exc:
            raise FormatError(f"malformed PNG: {exc}") from exc
        if img.mode == "L":
            return ImageGray(np.asarray(img, dtype=np.uint8).copy())
    return to_gray(load_image(path))


def load_mask(path: str | Path) -> BinaryMask:
    """Load an 8-bit grayscale PNG as a mask; any nonzero pixel is true."""
    raw = Path(path).read_bytes()
    if raw[:8] != b"\x89PNG\r\n\x1a\n":
        raise FormatError(f"{path}: masks must be 8-bit grayscale PNG")
    try:
        img = Image.open(io.BytesIO(raw))
        img.load()
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise FormatError(f"malformed PNG: {exc}") from exc
    if img.mode in _REJECTED_PNG_MODES:
        raise FormatError(f"16-bit mask PNG not supported (mode {img.mode})")
    if img.mode != "L":
        raise FormatError(f"masks must be 8-bit grayscale PNG, got mode {img.mode}")
    return BinaryMask(np.asarray(img, dtype=np.uint8) != 0)


def save_mask(mask: BinaryMask, path: str | Path) -> None:
    """Write a mask as 8-bit grayscale PNG with 0 = false, 255 = true."""
    Image.fromarray(mask.bits.astype(np.uint8) * 255).save(Path(path), format="PNG")
