"""Pipeline configuration: JSON schema, defaults, and startup validation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from ..errors import ConfigError
from ..geometry import LineDetectParams
from ..photometric import LIGHT_METHODS
from ..scene import SceneRule
from ..tracker import FastParams, MagsacParams, RansacParams

MATCHERS = ("bruteforce", "mutual", "fginn")
ESTIMATORS = ("ransac", "magsac")


@dataclass(frozen=True)
class RegionConfig:
    min_area_frac: float = 0.005  # of frame area
    min_fill: float = 0.6
    min_aspect: float = 0.25
    max_aspect: float = 4.0


@dataclass(frozen=True)
class AlignConfig:
    angle_tol: float = 10.0
    budget_diag_factor: float = 1.5  # line adoption budget, in bbox diagonals
    distance_mode: str = "endpoint"  # or "segment"


@dataclass(frozen=True)
class TrackerConfig:
    fast: FastParams = field(default_factory=FastParams)
    matcher: str = "fginn"
    symmetric: str | None = "union"  # None, "intersection", or "union"
    use_gms: bool = False
    fginn_ratio: float = 0.8
    fginn_min_geom_dist: float = 10.0
    gms_grid: int = 20
    estimator: str = "ransac"
    ransac: RansacParams = field(default_factory=RansacParams)
    magsac: MagsacParams = field(default_factory=MagsacParams)
    mask_margin: int = 5


@dataclass(frozen=True)
class PipelineConfig:
    frames_dir: Path
    ad_path: Path
    output_dir: Path
    artifacts_dir: Path | None = None
    light_method: str = "lab_light"
    light_alpha: float = 1.0
    light_stats_scope: str = "full"  # or "local" (2x quad bbox)
    scene_rule: SceneRule = field(default_factory=SceneRule)
    region: RegionConfig = field(default_factory=RegionConfig)
    align: AlignConfig = field(default_factory=AlignConfig)
    lines: LineDetectParams = field(default_factory=LineDetectParams)
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    occlusion_dilate: int = 2
    redetect_interval: int = 30
    redetect_iou: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.light_method not in LIGHT_METHODS:
            raise ConfigError(f"unknown light_method {self.light_method!r}")
        if self.light_stats_scope not in ("full", "local"):
            raise ConfigError(f"light_stats_scope must be 'full' or 'local'")
        if self.align.distance_mode not in ("endpoint", "segment"):
            raise ConfigError("align.distance_mode must be 'endpoint' or 'segment'")
        if self.tracker.matcher not in MATCHERS:
            raise ConfigError(f"tracker.matcher must be one of {MATCHERS}")
        if self.tracker.symmetric not in (None, "intersection", "union"):
            raise ConfigError("tracker.symmetric must be null, 'intersection', or 'union'")
        if self.tracker.estimator not in ESTIMATORS:
            raise ConfigError(f"tracker.estimator must be one of {ESTIMATORS}")
        if self.redetect_interval < 1:
            raise ConfigError("redetect_interval must be >= 1")

    def validate_paths(self) -> None:
        if not self.frames_dir.is_dir():
            raise ConfigError(f"frames_dir {self.frames_dir} is not a directory")
        if not self.ad_path.is_file():
            raise ConfigError(f"ad_path {self.ad_path} is not a file")
        if self.artifacts_dir is not None and not self.artifacts_dir.is_dir():
            raise ConfigError(f"artifacts_dir {self.artifacts_dir} is not a directory")


def _build(cls, doc: dict, context: str):
    known = {f.name: f for f in fields(cls)}
    unknown = set(doc) - set(known)
    if unknown:
        raise ConfigError(f"unknown {context} keys: {sorted(unknown)}")
    return cls(**doc)


def load_config(path: str | Path) -> PipelineConfig:
    """Parse and validate a JSON config file; all paths must resolve."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    try:
        cfg = _parse_config(doc, path.parent)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    cfg.validate_paths()
    return cfg


def _parse_config(doc: dict, base: Path) -> PipelineConfig:
    doc = dict(doc)
    for key in ("frames_dir", "ad_path", "output_dir"):
        if key not in doc:
            raise ConfigError(f"config is missing required key {key!r}")

    def as_path(v) -> Path:
        p = Path(v)
        return p if p.is_absolute() else base / p

    kwargs: dict = {
        "frames_dir": as_path(doc.pop("frames_dir")),
        "ad_path": as_path(doc.pop("ad_path")),
        "output_dir": as_path(doc.pop("output_dir")),
    }
    if doc.get("artifacts_dir") is not None:
        kwargs["artifacts_dir"] = as_path(doc.pop("artifacts_dir"))
    else:
        doc.pop("artifacts_dir", None)
    if "scene_rule" in doc:
        rule = dict(doc.pop("scene_rule"))
        if "artifact_classes" in rule:
            rule["artifact_classes"] = frozenset(rule["artifact_classes"])
        kwargs["scene_rule"] = _build(SceneRule, rule, "scene_rule")
    if "region" in doc:
        kwargs["region"] = _build(RegionConfig, doc.pop("region"), "region")
    if "align" in doc:
        kwargs["align"] = _build(AlignConfig, doc.pop("align"), "align")
    if "lines" in doc:
        kwargs["lines"] = _build(LineDetectParams, doc.pop("lines"), "lines")
    if "tracker" in doc:
        t = dict(doc.pop("tracker"))
        for sub, sub_cls in (("fast", FastParams), ("ransac", RansacParams), ("magsac", MagsacParams)):
            if sub in t:
                t[sub] = _build(sub_cls, t[sub], f"tracker.{sub}")
        kwargs["tracker"] = _build(TrackerConfig, t, "tracker")

    simple = {
        "light_method", "light_alpha", "light_stats_scope", "occlusion_dilate",
        "redetect_interval", "redetect_iou", "seed",
    }
    for key in list(doc):
        if key in simple:
            kwargs[key] = doc.pop(key)
    if doc:
        raise ConfigError(f"unknown config keys: {sorted(doc)}")
    return PipelineConfig(**kwargs)
