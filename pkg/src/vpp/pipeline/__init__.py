from .artifacts import FrameArtifacts, load_frame_artifacts
from .bench import (
    SyntheticSequence,
    bench_tracking,
    make_textured_background,
    make_translation_sequence,
)
from .config import (
    AlignConfig,
    PipelineConfig,
    RegionConfig,
    TrackerConfig,
    load_config,
)
from .metrics import angle_deviation, quad_iou, report_metrics
from .run import FrameResult, list_frames, run_matcher, run_pipeline

__all__ = [
    "AlignConfig",
    "FrameArtifacts",
    "FrameResult",
    "PipelineConfig",
    "RegionConfig",
    "SyntheticSequence",
    "TrackerConfig",
    "angle_deviation",
    "bench_tracking",
    "list_frames",
    "load_config",
    "load_frame_artifacts",
    "make_textured_background",
    "make_translation_sequence",
    "quad_iou",
    "report_metrics",
    "run_matcher",
    "run_pipeline",
]
