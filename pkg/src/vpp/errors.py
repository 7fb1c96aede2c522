"""Exception types shared across the toolkit."""


class VppError(Exception):
    """Base class for all toolkit errors."""


class FormatError(VppError):
    """Unsupported or malformed raster/JSON input."""


class DimensionMismatchError(VppError):
    """Companion rasters do not share the frame's dimensions."""


class EmptyImageError(VppError):
    """Operation requires a non-empty image."""


class ImageTooSmallError(VppError):
    """Image is below the operation's minimum size."""


class DegenerateQuadError(VppError):
    """Quad corners are collinear or self-intersecting."""


class DegenerateSegmentError(VppError):
    """Line segment endpoints coincide."""


class PointAtInfinityError(VppError):
    """Projective mapping sent a point to the plane at infinity."""


class DegenerateOutputError(VppError):
    """Region alignment produced a self-intersecting or wildly scaled quad."""


class InsufficientMatchesError(VppError):
    """Robust estimation needs at least four correspondences."""


class NoModelError(VppError):
    """No non-degenerate model could be fit to the data."""


class DegenerateTrackError(VppError):
    """Tracked quad self-intersects or its area changed implausibly."""


class ConfigError(VppError):
    """Pipeline configuration is invalid or references missing paths."""


class EmptySequenceError(VppError):
    """Frame directory contains no frames."""
