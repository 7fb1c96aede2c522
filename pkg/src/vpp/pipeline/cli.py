"""Command-line entry points: run, eval, bench-tracking, relight.

Exit codes: 0 success, 1 configuration error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..errors import ConfigError, EmptySequenceError, FormatError, VppError
from ..geometry import Quad
from ..imaging import load_image, save_image
from ..photometric import LIGHT_METHODS, match_brightness
from .bench import (
    DEFAULT_COMBOS,
    EXTRA_COMBOS,
    bench_tracking,
    format_bench_table,
    make_translation_sequence,
    sequence_from_config,
)
from .config import load_config
from .metrics import report_metrics
from .run import FrameResult, run_pipeline


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; that slot is for I/O
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="vpp", description="Virtual product placement toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="Process a frame sequence end to end.")
    run_p.add_argument("--config", required=True, help="JSON pipeline config")

    eval_p = sub.add_parser("eval", help="Score predicted quads against ground truth.")
    eval_p.add_argument("--pred", required=True, help="Output directory of a previous run")
    eval_p.add_argument("--gt", required=True, help='JSON {"quads": {stem: [[x,y]x4]}}')
    eval_p.add_argument("--out", default=None, help="Where to write metrics JSON")
    eval_p.add_argument(
        "--iou-threshold", type=float, default=0.0, help="IoU above this counts as GT overlap"
    )

    bench_p = sub.add_parser(
        "bench-tracking",
        help="Reproduce the reprojection benchmark (synthetic sequence, or real frames "
        "with --config using per-frame detections as pseudo ground truth).",
    )
    bench_p.add_argument("--config", default=None, help="Bench the configured frame sequence")
    bench_p.add_argument("--frames", type=int, default=30, help="Synthetic sequence length")
    bench_p.add_argument("--dx", type=int, default=2, help="Camera translation px/frame")
    bench_p.add_argument("--width", type=int, default=512)
    bench_p.add_argument("--height", type=int, default=288)
    bench_p.add_argument(
        "--noise",
        type=float,
        default=None,
        help="GT corner noise sigma, px (default 0.5 synthetic, 0 with --config)",
    )
    bench_p.add_argument("--seed", type=int, default=0)
    bench_p.add_argument("--all", action="store_true", help="Include non-FGINN matchers")
    bench_p.add_argument("--out", default=None, help="Where to write the rows as JSON")
    bench_p.add_argument("--trace", default=None, help="Per-frame trace JSONL path")

    relight_p = sub.add_parser("relight", help="Relight an ad image against a background.")
    relight_p.add_argument("--ad", required=True)
    relight_p.add_argument("--bg", required=True)
    relight_p.add_argument("--method", required=True, choices=sorted(LIGHT_METHODS))
    relight_p.add_argument("--alpha", type=float, default=1.0, help="Contrast for brightness mode")
    relight_p.add_argument("--out", default="relit.png")
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config)
    results = run_pipeline(config)
    rendered = sum(1 for r in results if r.quad is not None)
    print(f"processed {len(results)} frames, rendered ad on {rendered}")
    print(f"outputs in {config.output_dir}")
    return 0


def _cmd_eval(args) -> int:
    pred_dir = Path(args.pred)
    results_path = pred_dir / "results.jsonl"
    if not results_path.is_file():
        raise ConfigError(f"{results_path} not found; --pred must be a run output directory")
    results = []
    for line in results_path.read_text().splitlines():
        rec = json.loads(line)
        results.append(
            FrameResult(
                frame=rec["frame"],
                stem=rec["stem"],
                is_kitchen=rec["is_kitchen"],
                quad=Quad.from_points(rec["quad"]) if rec.get("quad") else None,
                reproj_error=rec.get("reproj_error"),
            )
        )
    try:
        gt_doc = json.loads(Path(args.gt).read_text())
        ground_truth = {stem: Quad.from_points(pts) for stem, pts in gt_doc["quads"].items()}
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{args.gt}: invalid ground-truth JSON: {exc}") from exc
    report = report_metrics(results, ground_truth, overlap_threshold=args.iou_threshold)
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text)
    print(text)
    return 0


def _cmd_bench(args) -> int:
    if args.config:
        config = load_config(args.config)
        seq = sequence_from_config(config)
        base = config.tracker
        noise = 0.0 if args.noise is None else args.noise  # real detections carry their own noise
    else:
        seq = make_translation_sequence(
            n_frames=args.frames, dx=args.dx, width=args.width, height=args.height, seed=args.seed
        )
        base = None
        noise = 0.5 if args.noise is None else args.noise
    combos = DEFAULT_COMBOS + EXTRA_COMBOS if args.all else DEFAULT_COMBOS
    rows = bench_tracking(
        seq, combos=combos, noise_sigma=noise, seed=args.seed, base=base, trace_path=args.trace
    )
    print(format_bench_table(rows))
    if args.out:
        Path(args.out).write_text(json.dumps(rows, indent=2))
    return 0


def _cmd_relight(args) -> int:
    ad = load_image(args.ad)
    bg = load_image(args.bg)
    if args.method == "brightness":
        out = match_brightness(ad, bg, args.alpha)
    else:
        out = LIGHT_METHODS[args.method](ad, bg)
    save_image(out, args.out)
    print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "eval": _cmd_eval,
    "bench-tracking": _cmd_bench,
    "relight": _cmd_relight,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (OSError, FormatError, EmptySequenceError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except VppError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
