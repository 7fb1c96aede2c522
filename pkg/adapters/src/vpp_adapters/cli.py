"""CLI: export interchange artifacts for a directory of frames."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .backends import create_backend
from .export import export_artifacts
from .interchange import ARTIFACT_KINDS
from .manifest import write_manifests


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vpp-adapters", description="Emit interchange artifacts for the vpp pipeline."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    exp = sub.add_parser("export", help="Run models over frames and write artifacts.")
    exp.add_argument("--frames", required=True, help="Directory of input frames")
    exp.add_argument("--out", required=True, help="Artifact output directory")
    exp.add_argument(
        "--emit",
        default=",".join(ARTIFACT_KINDS),
        help=f"Comma-separated kinds from {{{','.join(ARTIFACT_KINDS)}}}",
    )
    exp.add_argument(
        "--backend",
        default="torchvision",
        choices=("torchvision", "stub"),
        help="Model backend; 'stub' emits deterministic geometry for smoke tests",
    )
    exp.add_argument("--score-threshold", type=float, default=0.5)
    exp.add_argument("--mask-threshold", type=float, default=0.5)
    exp.add_argument(
        "--wall-class-ids",
        default="",
        help="Comma-separated class ids treated as wall by the segmentation model",
    )
    exp.add_argument("--device", default="cpu")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    kinds = [k.strip() for k in args.emit.split(",") if k.strip()]
    try:
        if args.backend == "stub":
            backend = create_backend("stub")
        else:
            wall_ids = tuple(int(v) for v in args.wall_class_ids.split(",") if v.strip())
            backend = create_backend(
                "torchvision",
                score_threshold=args.score_threshold,
                mask_threshold=args.mask_threshold,
                wall_class_ids=wall_ids,
                device=args.device,
            )
        manifests = export_artifacts(Path(args.frames), Path(args.out), kinds, backend)
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    manifest_path = Path(args.out) / "manifest.jsonl"
    write_manifests(manifests, manifest_path)
    n_err = sum(1 for m in manifests if m.errors)
    print(f"exported {len(manifests)} frames to {args.out} ({n_err} with errors)")
    print(f"manifest: {manifest_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
