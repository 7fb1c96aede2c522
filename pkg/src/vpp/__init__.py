"""Virtual product placement toolkit.

Inserts a 2-D ad image into a single-camera frame sequence: proposes empty
wall regions, perspective-aligns them against detected lines, relights the ad
to match the scene, composites around human occluders, and tracks the
placement across frames with robust homography estimation.
"""

from . import compositor, errors, geometry, imaging, photometric, pipeline, regions, scene, tracker

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "compositor",
    "errors",
    "geometry",
    "imaging",
    "photometric",
    "pipeline",
    "regions",
    "scene",
    "tracker",
]
