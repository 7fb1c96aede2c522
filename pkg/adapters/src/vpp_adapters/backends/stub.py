"""Deterministic geometry-only backend for plumbing validation.

Emits schema-valid artifacts derived from the frame dimensions alone: a wall
band with two plane folds, a centered person silhouette, matching
detections, and the wall's boundary lines. No model weights involved, which
is the point: smoke tests and round-trip checks must run offline.
"""

from __future__ import annotations

import numpy as np

from .base import Backend


class StubBackend(Backend):
    name = "stub"

    def _wall_box(self, frame: np.ndarray) -> tuple[int, int, int, int]:
        h, w = frame.shape[:2]
        return int(0.05 * w), int(0.08 * h), int(0.95 * w), int(0.52 * h)

    def wall(self, frame: np.ndarray) -> np.ndarray:
        h, w = frame.shape[:2]
        x0, y0, x1, y1 = self._wall_box(frame)
        mask = np.zeros((h, w), bool)
        mask[y0:y1, x0:x1] = True
        return mask

    def planes(self, frame: np.ndarray) -> np.ndarray:
        h, w = frame.shape[:2]
        x0, y0, x1, y1 = self._wall_box(frame)
        split = (x0 + x1) // 2
        labels = np.zeros((h, w), np.int32)
        labels[y0:y1, x0:split] = 1
        labels[y0:y1, split:x1] = 2
        return labels

    def human(self, frame: np.ndarray) -> np.ndarray:
        h, w = frame.shape[:2]
        mask = np.zeros((h, w), bool)
        bw = int(0.22 * w)
        x0 = (w - bw) // 2
        mask[int(0.45 * h) :, x0 : x0 + bw] = True
        return mask

    def detections(self, frame: np.ndarray) -> list[dict]:
        h, w = frame.shape[:2]
        bw = int(0.22 * w)
        x0 = (w - bw) // 2
        return [
            {"label": "person", "score": 0.97, "bbox": [x0, 0.45 * h, bw, 0.55 * h]},
            {"label": "bowl", "score": 0.85, "bbox": [0.1 * w, 0.8 * h, 0.12 * w, 0.1 * h]},
        ]

    def lines(self, frame: np.ndarray) -> list[tuple]:
        x0, y0, x1, y1 = self._wall_box(frame)
        split = (x0 + x1) // 2
        return [
            (x0, y1, x1, y1),  # wall base
            (x0, y0, x1, y0),  # wall top
            (x0, y0, x0, y1),
            (x1, y0, x1, y1),
            (split, y0, split, y1),  # plane fold
        ]

    def model_id(self, kind: str) -> str:
        return "stub/frame-geometry"
