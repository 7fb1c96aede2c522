"""Pretrained torchvision models behind the adapter interface.

Detections and human masks come from Mask R-CNN (COCO); wall masks come from
a semantic segmentation model filtered to caller-supplied class ids, since
the bundled models carry no wall class of their own. Plane maps degrade to a
single plane covering the wall (no pretrained plane-detection model ships
with torchvision); dedicated line models are not available here either, so
the lines kind is unsupported. Models load lazily on first use; a load
failure is raised as ModelLoadError and surfaces in the manifest.
"""

from __future__ import annotations

import numpy as np

from .base import Backend, UnsupportedArtifactError

# COCO 91-category instance labels, index = model class id
COCO_LABELS = {
    1: "person", 44: "bottle", 46: "wine glass", 47: "cup", 48: "fork",
    49: "knife", 50: "spoon", 51: "bowl", 62: "chair", 63: "couch",
    67: "dining table", 69: "oven", 70: "toaster", 71: "sink",
    72: "refrigerator", 78: "microwave",
}


class ModelLoadError(Exception):
    """Weights unavailable or the ML extra is not installed."""


class TorchvisionBackend(Backend):
    name = "torchvision"

    def __init__(
        self,
        score_threshold: float = 0.5,
        mask_threshold: float = 0.5,
        wall_class_ids: tuple[int, ...] = (),
        device: str = "cpu",
    ):
        self.score_threshold = score_threshold
        self.mask_threshold = mask_threshold
        self.wall_class_ids = tuple(wall_class_ids)
        self.device = device
        self._detector = None
        self._segmenter = None

    # -- model loading -----------------------------------------------------

    def _load_detector(self):
        if self._detector is None:
            try:
                import torch
                from torchvision.models.detection import maskrcnn_resnet50_fpn

                model = maskrcnn_resnet50_fpn(weights="DEFAULT")
                model.eval().to(self.device)
                self._detector = (torch, model)
            except Exception as exc:
                raise ModelLoadError(f"maskrcnn_resnet50_fpn unavailable: {exc}") from exc
        return self._detector

    def _load_segmenter(self):
        if self._segmenter is None:
            try:
                import torch
                from torchvision.models.segmentation import deeplabv3_resnet50

                model = deeplabv3_resnet50(weights="DEFAULT")
                model.eval().to(self.device)
                self._segmenter = (torch, model)
            except Exception as exc:
                raise ModelLoadError(f"deeplabv3_resnet50 unavailable: {exc}") from exc
        return self._segmenter

    def _detect(self, frame: np.ndarray) -> dict:
        torch, model = self._load_detector()
        tensor = torch.from_numpy(frame.transpose(2, 0, 1)).float() / 255.0
        with torch.no_grad():
            (out,) = model([tensor.to(self.device)])
        return {k: v.cpu().numpy() for k, v in out.items()}

    # -- artifact producers --------------------------------------------------

    def detections(self, frame: np.ndarray) -> list[dict]:
        out = self._detect(frame)
        dets = []
        for box, label, score in zip(out["boxes"], out["labels"], out["scores"]):
            if score < self.score_threshold:
                continue
            name = COCO_LABELS.get(int(label))
            if name is None:
                continue
            x0, y0, x1, y1 = (float(v) for v in box)
            dets.append(
                {"label": name, "score": float(score), "bbox": [x0, y0, x1 - x0, y1 - y0]}
            )
        return dets

    def human(self, frame: np.ndarray) -> np.ndarray:
        out = self._detect(frame)
        h, w = frame.shape[:2]
        mask = np.zeros((h, w), bool)
        for inst_mask, label, score in zip(out["masks"], out["labels"], out["scores"]):
            if int(label) == 1 and score >= self.score_threshold:
                mask |= inst_mask[0] >= self.mask_threshold
        return mask

    def wall(self, frame: np.ndarray) -> np.ndarray:
        if not self.wall_class_ids:
            raise UnsupportedArtifactError(
                "wall masks need --wall-class-ids for the chosen segmentation model"
            )
        torch, model = self._load_segmenter()
        tensor = torch.from_numpy(frame.transpose(2, 0, 1)).float() / 255.0
        mean = torch.tensor([0.485, 0.456, 0.406]).view(3, 1, 1)
        std = torch.tensor([0.229, 0.224, 0.225]).view(3, 1, 1)
        tensor = (tensor - mean) / std
        with torch.no_grad():
            out = model(tensor[None].to(self.device))["out"][0]
        classes = out.argmax(0).cpu().numpy()
        return np.isin(classes, self.wall_class_ids)

    def planes(self, frame: np.ndarray) -> np.ndarray:
        # no pretrained plane-detection model is bundled: one plane per wall
        return self.wall(frame).astype(np.int32)

    def model_id(self, kind: str) -> str:
        if kind in ("detections", "human"):
            return "torchvision/maskrcnn_resnet50_fpn"
        if kind == "wall":
            return f"torchvision/deeplabv3_resnet50(classes={list(self.wall_class_ids)})"
        if kind == "planes":
            return "torchvision/deeplabv3_resnet50+single-plane"
        return self.name

    def threshold(self, kind: str) -> float | None:
        if kind in ("detections", "human", "wall", "planes"):
            return self.score_threshold
        return None
