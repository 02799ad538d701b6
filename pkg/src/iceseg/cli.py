"""Command-line interface: segment / evaluate / ablate / inspect.

Exit codes: 0 success, 2 input error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config
from .exceptions import IcesegError, InputError, LengthMismatch
from .ice import normalize_raster
from .media_io import (
    FrameSequence,
    load_frame_sequence,
    load_proposals,
    load_saliency_override,
    read_flo,
    read_mask,
    write_gray,
    write_indexed_png,
    write_label_png,
    write_mask,
)
from .metrics import evaluate, run_se_ablation
from .pipeline import run_pipeline
from .proposals import extract_boundary

from PIL import Image


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iceseg",
        description="Unsupervised video foreground segmentation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--frames", help="directory of input frames (PNG/PPM)")
    common.add_argument("--flow", help="directory of Middlebury .flo files")
    common.add_argument("--proposals", help="directory of per-frame proposal masks")
    common.add_argument("--saliency", help="directory of precomputed saliency PNGs")
    common.add_argument("--gt", help="directory of ground-truth masks")
    common.add_argument("--out", help="output directory")
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--threads", type=int, default=1, help="frame-parallel workers")

    seg = sub.add_parser("segment", parents=[common], help="segment a sequence")
    seg.add_argument("--dump-ice", action="store_true", help="dump fused cue heatmaps")
    seg.add_argument("--dump-trimap", action="store_true", help="dump trimap rasters")
    seg.add_argument("--dump-superpixels", action="store_true", help="dump label rasters")
    seg.add_argument("--overlay", action="store_true", help="write green-contour overlays")
    seg.add_argument("--se-mode", action="store_true", help="separate-encoding baseline")

    sub.add_parser("evaluate", parents=[common], help="score masks in <out>/masks against --gt")
    sub.add_parser("ablate", parents=[common], help="paired constrained-vs-separate run")
    sub.add_parser("inspect", parents=[common], help="validate inputs and print a summary")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "segment":
            return cmd_segment(args)
        if args.command == "evaluate":
            return cmd_evaluate(args)
        if args.command == "ablate":
            return cmd_ablate(args)
        return cmd_inspect(args)
    except InputError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except IcesegError as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise InputError(f"--{name} is required for this command")


def _load_inputs(args):
    sequence = load_frame_sequence(args.frames)
    flows = None
    if args.flow:
        paths = sorted(Path(args.flow).glob("*.flo"))
        if len(paths) not in (sequence.K - 1, sequence.K):
            raise LengthMismatch(
                f"{len(paths)} .flo files for {sequence.K} frames "
                f"(expected {sequence.K - 1} or {sequence.K})"
            )
        flows = [read_flo(p) for p in paths]
    proposals = None
    if args.proposals:
        proposals = [
            load_proposals(args.proposals, i, sequence.frame_shape)
            for i in range(sequence.K)
        ]
    saliency = None
    if args.saliency:
        saliency = [
            load_saliency_override(args.saliency, i, sequence.frame_shape)
            for i in range(sequence.K)
        ]
    if args.gt:
        gt_paths = sorted(Path(args.gt).glob("*.png"))
        if len(gt_paths) != sequence.K:
            raise LengthMismatch(
                f"{len(gt_paths)} ground-truth masks for {sequence.K} frames"
            )
        sequence = FrameSequence(
            frames=sequence.frames,
            gt_masks=[read_mask(p) for p in gt_paths],
            name=sequence.name,
        )
    config = load_config(args.config) if args.config else RunConfig()
    return sequence, flows, proposals, saliency, config


def cmd_segment(args) -> int:
    _require(args, "frames", "out")
    sequence, flows, proposals, saliency, config = _load_inputs(args)
    out = Path(args.out)
    (out / "masks").mkdir(parents=True, exist_ok=True)

    result = run_pipeline(
        sequence,
        config,
        mode="se" if args.se_mode else "full",
        flows=flows,
        proposals_rgb=proposals,
        saliency_rgb=saliency,
        threads=args.threads,
    )

    for i, mask in enumerate(result.masks):
        write_mask(mask, out / "masks" / f"{i:05d}.png")

    with open(out / "energy_trace.json", "w", encoding="utf-8") as fh:
        json.dump(result.energy_trace, fh, indent=2, sort_keys=True)
        fh.write("\n")

    if args.overlay:
        (out / "overlay").mkdir(exist_ok=True)
        for i, mask in enumerate(result.masks):
            img = sequence.frames[i].copy()
            img[extract_boundary(mask)] = (0, 255, 0)
            Image.fromarray(img).save(out / "overlay" / f"{i:05d}.png")

    if args.dump_ice and not args.se_mode:
        (out / "ice").mkdir(exist_ok=True)
        for i, c in enumerate(result.cues):
            write_gray(c.ice.values, out / "ice" / f"{i:05d}_fused.png")
            write_gray(
                normalize_raster(c.ice.constrained_motion),
                out / "ice" / f"{i:05d}_motion.png",
            )
            write_gray(
                normalize_raster(c.ice.constrained_appearance),
                out / "ice" / f"{i:05d}_appearance.png",
            )

    if args.dump_trimap and not args.se_mode:
        (out / "trimap").mkdir(exist_ok=True)
        for i, c in enumerate(result.cues):
            write_gray(c.trimap.values, out / "trimap" / f"{i:05d}_trimap.png")
            write_gray(c.trimap.levels / 21.0, out / "trimap" / f"{i:05d}_levels.png")

    if args.dump_superpixels:
        (out / "superpixels").mkdir(exist_ok=True)
        for i, c in enumerate(result.cues):
            write_label_png(c.sp_rgb.labels, out / "superpixels" / f"{i:05d}.png")

    if result.episodes:
        (out / "ids").mkdir(exist_ok=True)
        for i, ids in enumerate(result.id_rasters):
            write_indexed_png(np.minimum(ids, 255), out / "ids" / f"{i:05d}.png")

    manifest = {
        "command": "segment",
        "mode": result.mode,
        "config": config.to_dict(),
        "inputs": {
            "frames": str(args.frames),
            "n_frames": sequence.K,
            "flow_source": "files" if flows else "fallback",
            "proposal_source": "files" if proposals else "fallback",
            "saliency_source": "files" if saliency else "internal",
        },
        "outputs": {"n_masks": len(result.masks), "mask_dir": "masks"},
        "episodes": [
            {"start": e.start, "end": e.end, "n_before": e.n_before, "m_during": e.m_during}
            for e in result.episodes
        ],
        "blob_counts": result.blob_counts,
        "terms": result.terms,
    }
    with open(out / "run_manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def cmd_evaluate(args) -> int:
    _require(args, "out", "gt")
    mask_dir = Path(args.out) / "masks"
    mask_paths = sorted(mask_dir.glob("*.png"))
    if not mask_paths:
        raise InputError(f"no masks found under {mask_dir}")
    gt_paths = sorted(Path(args.gt).glob("*.png"))
    if len(gt_paths) != len(mask_paths):
        raise LengthMismatch(
            f"{len(mask_paths)} predicted masks vs {len(gt_paths)} ground-truth masks"
        )
    fg = [read_mask(p) for p in mask_paths]
    gt = [read_mask(p) for p in gt_paths]
    config = load_config(args.config) if args.config else RunConfig()
    report = evaluate(fg, gt, name=Path(args.out).name, config=config)
    report.save_json(Path(args.out) / "report.json")
    report.save_csv(Path(args.out) / "per_frame_errors.csv")
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0


def cmd_ablate(args) -> int:
    _require(args, "frames", "gt", "out")
    sequence, flows, proposals, saliency, config = _load_inputs(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    constrained, separate = run_se_ablation(sequence, config, threads=args.threads)
    constrained.save_json(out / "report_ice.json")
    separate.save_json(out / "report_se.json")
    summary = {
        "ice": constrained.to_dict(),
        "se": separate.to_dict(),
        "ice_not_worse": constrained.avg_pixel_error <= separate.avg_pixel_error,
    }
    with open(out / "ablation.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_inspect(args) -> int:
    _require(args, "frames")
    sequence, flows, proposals, saliency, config = _load_inputs(args)
    summary = {
        "name": sequence.name,
        "n_frames": sequence.K,
        "frame_shape": list(sequence.frames[0].shape),
        "has_gt": sequence.gt_masks is not None,
        "flow_source": "files" if flows else "fallback",
        "proposal_source": "files" if proposals else "fallback",
        "saliency_source": "files" if saliency else "internal",
        "config": config.to_dict(),
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
