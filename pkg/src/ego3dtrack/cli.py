"""Command-line entry point.

Subcommands:
    simulate   render a synthetic scene to a dataset directory
    track      run the proposal-matching tracker over a dataset
    evaluate   score trajectories against the dataset annotations
    guided2d   compare 2-D box selection with and without 3-D guidance

Every failure exits non-zero with a one-line diagnostic; an artifact
path is only written completely or not at all.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import dataio, simulation
from .errors import Ego3DTrackError
from .evaluation import (
    EvalConfig,
    Metrics2D,
    accumulate_pr,
    bbox_iou,
    format_report_table,
    metrics_2d,
)
from .geometry import project_to_pixel
from .errors import GeometryError
from .tracking import (
    MVPE,
    SVOE,
    Template,
    TrackerConfig,
    guided_2d_select,
    make_template,
    match_proposals,
    track_instance,
)

log = logging.getLogger("ego3dtrack")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ego3dtrack",
        description="Egocentric 3-D instance tracking toolkit",
    )
    parser.add_argument(
        "--log-level",
        default=os.environ.get("EGO3DTRACK_LOG", "WARNING"),
        help="logging level (also via EGO3DTRACK_LOG; default WARNING)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="render a synthetic scene to a dataset directory")
    group = p_sim.add_mutually_exclusive_group(required=True)
    group.add_argument("--spec", help="scene spec JSON file")
    group.add_argument(
        "--preset",
        choices=sorted(simulation.PRESETS),
        help="named built-in scene",
    )
    p_sim.add_argument("--seed", type=int, default=None,
                       help="override the scene seed (default: the spec file's own "
                            "seed, or 0 for presets)")
    p_sim.add_argument("--out", required=True, help="output dataset directory")

    p_track = sub.add_parser("track", help="track every enrolled instance")
    p_track.add_argument("dataset", help="dataset directory")
    p_track.add_argument("--enroll", choices=["svoe", "mvpe"], required=True,
                         help="enrollment mode")
    p_track.add_argument("--views", type=int, default=5,
                         help="multi-view enrollment views to average (default 5)")
    p_track.add_argument("--cosine-threshold", type=float, default=0.6,
                         help="visibility threshold on cosine similarity (default 0.6)")
    p_track.add_argument("--kalman", action="store_true",
                         help="smooth fresh detections with the constant-velocity filter")
    p_track.add_argument("--reset-threshold", type=float, default=0.15,
                         help="innovation distance in meters that restarts the filter (default 0.15)")
    p_track.add_argument("--visible-only", action="store_true",
                         help="accept fresh detections only on annotated-visible frames")
    p_track.add_argument("--depth-window", type=int, default=2,
                         help="median fallback window radius in pixels (default 2)")
    p_track.add_argument("--out", required=True, help="output trajectories file")

    p_eval = sub.add_parser("evaluate", help="score trajectories against annotations")
    p_eval.add_argument("dataset", help="dataset directory")
    p_eval.add_argument("trajectories", help="trajectories file from `track`")
    p_eval.add_argument("--thresholds", default="0.25,0.5,0.75,1.0,1.5",
                        help="comma-separated distance thresholds in meters "
                             "(default 0.25,0.5,0.75,1.0,1.5)")
    p_eval.add_argument("--identity-aware", action="store_true",
                        help="match only same-id prediction/ground-truth pairs "
                             "(default: distance-based matching)")
    p_eval.add_argument("--include-dynamic", action="store_true",
                        help="also score frames outside stationary intervals "
                             "(default: stationary only)")
    p_eval.add_argument("--report", choices=["text", "json"], default="text",
                        help="output file format (default text)")
    p_eval.add_argument("--out", required=True, help="output report file")

    p_g2d = sub.add_parser("guided2d", help="2-D metrics with and without 3-D guidance")
    p_g2d.add_argument("dataset", help="dataset directory")
    p_g2d.add_argument("trajectories", help="trajectories file from `track`")
    p_g2d.add_argument("--enroll", choices=["svoe", "mvpe"], required=True,
                       help="enrollment mode")
    p_g2d.add_argument("--views", type=int, default=5,
                       help="multi-view enrollment views to average (default 5)")
    p_g2d.add_argument("--cosine-threshold", type=float, default=0.6,
                       help="visibility threshold on cosine similarity (default 0.6)")
    p_g2d.add_argument("--out", required=True, help="output JSON file")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING))
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "track":
            return _cmd_track(args)
        if args.command == "evaluate":
            return _cmd_evaluate(args)
        if args.command == "guided2d":
            return _cmd_guided2d(args)
        raise AssertionError(f"unhandled command {args.command}")
    except Ego3DTrackError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _cmd_simulate(args) -> int:
    if args.spec:
        try:
            with open(args.spec, encoding="utf-8") as f:
                text = f.read()
        except OSError as exc:
            print(f"error: cannot read spec: {exc}", file=sys.stderr)
            return 1
        spec = simulation.SceneSpec.from_json(text)
        if args.seed is not None:
            d = spec.to_dict()
            d["seed"] = args.seed
            spec = simulation.SceneSpec.from_dict(d)
    else:
        spec = simulation.PRESETS[args.preset](args.seed if args.seed is not None else 0)
    log.info("rendering %d frames", spec.num_frames)
    frames = simulation.generate_scene(spec)
    manifest = simulation.export_dataset(frames, spec, args.out)
    print(f"wrote dataset to {args.out} ({spec.num_frames} frames, "
          f"manifest {manifest['combined'][:16]})")
    return 0


def _tracker_config(args) -> TrackerConfig:
    return TrackerConfig(
        cosine_threshold=args.cosine_threshold,
        reset_threshold=getattr(args, "reset_threshold", 0.15),
        use_kalman=getattr(args, "kalman", False),
        depth_window_radius=getattr(args, "depth_window", 2),
        visible_only_update=getattr(args, "visible_only", False),
    )


def _build_templates(dataset: dataio.Dataset, mode: str, views: int) -> dict[str, Template]:
    """Templates per instance id from the requested enrollment mode."""
    templates: dict[str, Template] = {}
    if mode == "svoe":
        if dataset.svoe is None:
            raise dataio.DataIOError("dataset has no single-view enrollment file")
        for record in dataset.svoe:
            candidates = dataset.proposals.get(record.frame, [])
            best = None
            best_iou = 0.0
            for prop in candidates:
                iou = bbox_iou(prop.bbox, record.bbox)
                if iou > best_iou:
                    best, best_iou = prop, iou
            if best is None:
                raise dataio.DataIOError(
                    f"no proposal overlaps the enrollment box of {record.instance_id!r} "
                    f"on frame {record.frame}"
                )
            templates[record.instance_id] = Template(
                embedding=best.embedding, source=SVOE, view_count=1
            )
    else:
        if dataset.mvpe is None:
            raise dataio.DataIOError("dataset has no multi-view enrollment file")
        if not dataset.mvpe.views:
            raise dataio.DataIOError("multi-view enrollment file contains no embeddings")
        for instance_id, all_views in dataset.mvpe.views.items():
            take = all_views[: max(1, views)]
            templates[instance_id] = make_template(take, MVPE)
    return templates


def _cmd_track(args) -> int:
    dataset = dataio.load_dataset(args.dataset)
    cfg = _tracker_config(args)
    templates = _build_templates(dataset, args.enroll, args.views)
    # Depth maps are read once and shared across instances.
    frame_inputs = list(dataset.frame_inputs())
    gt_by_id = dataset.annotations.by_id()
    trajectories = {}
    for instance_id, template in sorted(templates.items()):
        visible_frames = None
        if cfg.visible_only_update:
            gt = gt_by_id.get(instance_id)
            if gt is None:
                raise dataio.DataIOError(
                    f"--visible-only needs annotations for {instance_id!r}"
                )
            visible_frames = {f for f, vis in gt.visibility.items() if vis}
        log.info("tracking %s", instance_id)
        trajectories[instance_id] = track_instance(
            frame_inputs, template, dataset.intrinsics, cfg, visible_frames=visible_frames
        )
    dataio.write_trajectories(args.out, trajectories)
    total = sum(len(t) for t in trajectories.values())
    print(f"wrote {len(trajectories)} trajectories ({total} entries) to {args.out}")
    return 0


def _parse_thresholds(text: str) -> tuple:
    try:
        values = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise Ego3DTrackError(f"bad threshold list {text!r}: {exc}") from exc
    return values


def _cmd_evaluate(args) -> int:
    dataset = dataio.load_dataset(args.dataset)
    trajectories = dataio.read_trajectories(args.trajectories)
    cfg = EvalConfig(
        thresholds=_parse_thresholds(args.thresholds),
        identity_aware=args.identity_aware,
        evaluate_stationary_only=not args.include_dynamic,
    )
    report = accumulate_pr(
        dataset.annotations.instances,
        trajectories,
        cfg,
        poses=dataset.poses,
        num_frames=dataset.num_frames,
    )
    table = format_report_table(report)
    print(table)
    if args.report == "json":
        dataio.write_report(args.out, report)
    else:
        dataio.atomic_write_text(args.out, table + "\n")
    print(f"wrote report to {args.out}")
    return 0


def _cmd_guided2d(args) -> int:
    dataset = dataio.load_dataset(args.dataset)
    trajectories = dataio.read_trajectories(args.trajectories)
    templates = _build_templates(dataset, args.enroll, args.views)

    gt_boxes: dict = {}
    guided: dict = {}
    unguided: dict = {}
    for instance_id, template in sorted(templates.items()):
        gt = dataset.annotations.by_id().get(instance_id)
        trajectory = trajectories.get(instance_id)
        if gt is None:
            continue
        for frame, bbox in gt.boxes_2d.items():
            key = (instance_id, frame)
            gt_boxes[key] = bbox
            proposals = dataset.proposals.get(frame, [])
            match = match_proposals(proposals, template, args.cosine_threshold)
            if match is not None:
                unguided[key] = match[0].bbox
            point = None if trajectory is None else trajectory.point_at(frame)
            if point is not None:
                try:
                    projected, _ = project_to_pixel(
                        point, dataset.intrinsics, dataset.pose(frame)
                    )
                except GeometryError:
                    projected = None
                if projected is not None:
                    picked = guided_2d_select(
                        proposals, projected, template, args.cosine_threshold
                    )
                    if picked is not None:
                        guided[key] = picked

    with_guidance = metrics_2d(guided, gt_boxes)
    without_guidance = metrics_2d(unguided, gt_boxes)
    _print_guided_table(with_guidance, without_guidance)
    payload = {
        "with_3d_guidance": with_guidance.to_dict(),
        "without_3d_guidance": without_guidance.to_dict(),
    }
    dataio.atomic_write_text(args.out, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"wrote 2-D comparison to {args.out}")
    return 0


def _print_guided_table(with_g: Metrics2D, without_g: Metrics2D) -> None:
    print(f"{'3D guidance':<14}{'AUC(%)':>8}{'N.Prec(%)':>11}{'Prec(%)':>9}{'frames':>8}")
    for name, m in (("without", without_g), ("with", with_g)):
        print(
            f"{name:<14}{100 * m.auc:8.1f}{100 * m.norm_precision:11.1f}"
            f"{100 * m.precision:9.1f}{m.frame_count:8d}"
        )


if __name__ == "__main__":
    sys.exit(main())
