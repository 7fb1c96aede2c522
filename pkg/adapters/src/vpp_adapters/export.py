"""Batch export: run a backend over a frame directory, emit artifacts + manifest."""

from __future__ import annotations

from pathlib import Path

from . import interchange
from .backends import Backend
from .manifest import AdapterManifest

_WRITERS = {
    "wall": (interchange.WALL_SUFFIX, interchange.write_mask),
    "planes": (interchange.PLANES_SUFFIX, interchange.write_labelmap),
    "human": (interchange.HUMAN_SUFFIX, interchange.write_mask),
    "detections": (interchange.DETECTIONS_SUFFIX, interchange.write_detections),
    "lines": (interchange.LINES_SUFFIX, interchange.write_lines),
}

FRAME_SUFFIXES = (".png", ".ppm", ".jpg", ".jpeg")


def list_frames(frame_dir: Path) -> list[Path]:
    frames = sorted(
        p for p in Path(frame_dir).iterdir() if p.suffix.lower() in FRAME_SUFFIXES and p.is_file()
    )
    if not frames:
        raise FileNotFoundError(f"no frames in {frame_dir}")
    return frames


def export_artifacts(
    frame_dir: Path, out_dir: Path, kinds: list[str], backend: Backend
) -> list[AdapterManifest]:
    """Emit the requested artifact kinds for every frame, stem-matched.

    Per-frame inference failures (and unavailable models) are recorded in the
    manifest and processing continues; the manifest JSONL lands next to the
    artifacts as ``manifest.jsonl``.
    """
    unknown = set(kinds) - set(_WRITERS)
    if unknown:
        raise ValueError(f"unknown artifact kinds: {sorted(unknown)}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    manifests = []
    for frame_path in list_frames(frame_dir):
        manifest = AdapterManifest(stem=frame_path.stem)
        try:
            frame = interchange.load_frame(frame_path)
        except Exception as exc:
            manifest.errors["frame"] = f"unreadable frame: {exc}"
            manifests.append(manifest)
            continue
        for kind in kinds:
            suffix, writer = _WRITERS[kind]
            target = out_dir / f"{frame_path.stem}{suffix}"
            try:
                payload = getattr(backend, kind)(frame)
                writer(payload, target)
            except Exception as exc:
                manifest.errors[kind] = f"{type(exc).__name__}: {exc}"
                continue
            manifest.emitted[kind] = target.name
            manifest.models[kind] = backend.model_id(kind)
            threshold = backend.threshold(kind)
            if threshold is not None:
                manifest.thresholds[kind] = threshold
        manifests.append(manifest)
    return manifests
