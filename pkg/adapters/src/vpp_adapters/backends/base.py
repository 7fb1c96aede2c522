"""Backend interface: one producer method per artifact kind."""

from __future__ import annotations

import numpy as np


class UnsupportedArtifactError(Exception):
    """The backend has no model for this artifact kind."""


class Backend:
    name = "base"

    def wall(self, frame: np.ndarray) -> np.ndarray:
        raise UnsupportedArtifactError(f"{self.name} backend does not produce wall masks")

    def planes(self, frame: np.ndarray) -> np.ndarray:
        raise UnsupportedArtifactError(f"{self.name} backend does not produce plane maps")

    def human(self, frame: np.ndarray) -> np.ndarray:
        raise UnsupportedArtifactError(f"{self.name} backend does not produce human masks")

    def detections(self, frame: np.ndarray) -> list[dict]:
        raise UnsupportedArtifactError(f"{self.name} backend does not produce detections")

    def lines(self, frame: np.ndarray) -> list[tuple]:
        raise UnsupportedArtifactError(f"{self.name} backend does not produce lines")

    def model_id(self, kind: str) -> str:
        return self.name

    def threshold(self, kind: str) -> float | None:
        return None
