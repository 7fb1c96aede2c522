from pathlib import Path

import numpy as np
import pytest

from vpp.imaging import BinaryMask, ImageGray, ImageRGB, save_image, save_mask
from vpp.pipeline import PipelineConfig, make_translation_sequence
from vpp.pipeline.config import RegionConfig
from vpp.regions import LabelMap, save_labelmap
from vpp.scene import Detection, save_detections


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def random_rgb(rng, w=32, h=24) -> ImageRGB:
    return ImageRGB(rng.integers(0, 256, (h, w, 3)).astype(np.uint8))


def random_gray(rng, w=32, h=24) -> ImageGray:
    return ImageGray(rng.integers(0, 256, (h, w)).astype(np.uint8))


def random_mask(rng, w=32, h=24, p=0.5) -> BinaryMask:
    return BinaryMask(rng.random((h, w)) < p)


def flat_rgb(r, g, b, w=8, h=8) -> ImageRGB:
    data = np.zeros((h, w, 3), np.uint8)
    data[:] = (r, g, b)
    return ImageRGB(data)


def draw_stripe(arr: np.ndarray, p1, p2, value, thickness=3) -> None:
    """Rasterize a thick line segment into a 2-D uint8 array (for synthetic tests)."""
    p1 = np.asarray(p1, float)
    p2 = np.asarray(p2, float)
    n = int(np.hypot(*(p2 - p1)) * 4) + 1
    r = thickness // 2
    h, w = arr.shape[:2]
    for t in np.linspace(0.0, 1.0, n):
        x, y = p1 + t * (p2 - p1)
        x0, y0 = int(round(x)), int(round(y))
        arr[max(0, y0 - r) : min(h, y0 + r + 1), max(0, x0 - r) : min(w, x0 + r + 1)] = value


def build_scene(
    root: Path,
    n_frames: int = 5,
    dx: int = 2,
    width: int = 320,
    height: int = 240,
    seed: int = 3,
    kitchen: bool = True,
    with_human: bool = False,
    detections_every_frame: bool = False,
    wall_every_frame: bool = False,
):
    """Synthetic frame directory + interchange artifacts + config for run tests.

    Wall/plane artifacts exist for frame 0 only, so later frames exercise the
    tracking path; GT quads come from the translation generator.
    """
    frames_dir = root / "frames"
    art_dir = root / "artifacts"
    out_dir = root / "out"
    frames_dir.mkdir()
    art_dir.mkdir()
    seq = make_translation_sequence(n_frames=n_frames, dx=dx, width=width, height=height, seed=seed)
    for i, frame in enumerate(seq.frames):
        save_image(frame, frames_dir / f"f{i:04d}.png")

    wall_stems = range(n_frames) if wall_every_frame else [0]
    for i in wall_stems:
        q = seq.gt_quads[i]
        wall = np.zeros((height, width), bool)
        x0, y0 = int(q.corners[0, 0]), int(q.corners[0, 1])
        x1, y1 = int(q.corners[2, 0]), int(q.corners[2, 1])
        wall[y0 : y1 + 1, x0 : x1 + 1] = True
        save_mask(BinaryMask(wall), art_dir / f"f{i:04d}.wall.png")
        save_labelmap(LabelMap(wall.astype(np.int32)), art_dir / f"f{i:04d}.planes.png")

    if kitchen:
        dets = [
            Detection("person", 0.97, (5.0, 5.0, 30.0, 60.0)),
            Detection("bowl", 0.88, (40.0, height - 40.0, 25.0, 18.0)),
        ]
    else:
        dets = [Detection("person", 0.5, (5.0, 5.0, 30.0, 60.0))]
    stems = range(n_frames) if detections_every_frame else [0]
    for i in stems:
        save_detections(dets, art_dir / f"f{i:04d}.detections.json")

    if with_human:
        human = np.zeros((height, width), bool)
        human[height // 2 :, : width // 3] = True
        for i in range(n_frames):
            save_mask(BinaryMask(human), art_dir / f"f{i:04d}.human.png")

    rng = np.random.default_rng(seed + 1)
    ad = ImageRGB(rng.integers(0, 256, (60, 40, 3)).astype(np.uint8))
    save_image(ad, root / "ad.png")

    config = PipelineConfig(
        frames_dir=frames_dir,
        ad_path=root / "ad.png",
        output_dir=out_dir,
        artifacts_dir=art_dir,
        region=RegionConfig(min_fill=0.5),
    )
    return config, seq
