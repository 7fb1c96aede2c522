"""Per-frame manifest of what was emitted, by which model, at what thresholds."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class AdapterManifest:
    stem: str
    emitted: dict[str, str] = field(default_factory=dict)  # kind -> file name
    models: dict[str, str] = field(default_factory=dict)  # kind -> model identifier
    thresholds: dict[str, float] = field(default_factory=dict)
    errors: dict[str, str] = field(default_factory=dict)  # kind -> failure reason

    def to_record(self) -> dict:
        return {
            "stem": self.stem,
            "emitted": self.emitted,
            "models": self.models,
            "thresholds": self.thresholds,
            "errors": self.errors,
        }


def write_manifests(manifests: list[AdapterManifest], path: Path) -> None:
    with path.open("w") as fh:
        for m in manifests:
            fh.write(json.dumps(m.to_record(), sort_keys=True) + "\n")


def load_manifests(path: Path) -> list[AdapterManifest]:
    out = []
    for line in Path(path).read_text().splitlines():
        rec = json.loads(line)
        out.append(
            AdapterManifest(
                stem=rec["stem"],
                emitted=rec.get("emitted", {}),
                models=rec.get("models", {}),
                thresholds=rec.get("thresholds", {}),
                errors=rec.get("errors", {}),
            )
        )
    return out
