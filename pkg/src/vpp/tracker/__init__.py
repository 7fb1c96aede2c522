from .features import (
    BinaryDescriptor,
    FastParams,
    Keypoint,
    describe,
    detect_keypoints,
    filter_keypoints_by_mask,
)
from .matching import (
    Match,
    filter_gms,
    hamming_matrix,
    match_bruteforce,
    match_fginn,
    match_mutual_nn,
    match_symmetric,
)
from .robust import (
    MagsacParams,
    RansacParams,
    RobustFitResult,
    estimate_homography_magsac,
    estimate_homography_ransac,
    symmetric_transfer_error,
)
from .track import load_features, reprojection_error, save_features, track_quad

__all__ = [
    "BinaryDescriptor",
    "FastParams",
    "Keypoint",
    "MagsacParams",
    "Match",
    "RansacParams",
    "RobustFitResult",
    "describe",
    "detect_keypoints",
    "estimate_homography_magsac",
    "estimate_homography_ransac",
    "filter_gms",
    "filter_keypoints_by_mask",
    "hamming_matrix",
    "load_features",
    "match_bruteforce",
    "match_fginn",
    "match_mutual_nn",
    "match_symmetric",
    "reprojection_error",
    "save_features",
    "symmetric_transfer_error",
    "track_quad",
]
