"""Scoring for 3-D instance tracking plus the 2-D tracking metrics.

3-D protocol: at every evaluated frame, ground-truth locations are
matched one-to-one to predictions by ascending L2 distance; a pair
counts as a true positive at threshold tau when its distance is <= tau.
Unmatched predictions are false positives, unmatched ground truths
false negatives. Precision/recall are micro-averaged over all frames
and instances. L2 and angular errors are averaged over frames where
both the ground truth and the prediction of an instance exist.

Only frames inside an instance's stationary intervals are evaluated by
default: a location is well-defined only while the object is not being
handled.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import EvaluationError
from .geometry import CameraPose, angular_error

DEFAULT_THRESHOLDS = (0.25, 0.5, 0.75, 1.0, 1.5)

# 2-D metric conventions from the standard single-object-tracking
# benchmark toolkit: 21-point overlap grid, 20 px center threshold,
# 0.2 size-normalized center threshold.
IOU_GRID = tuple(round(0.05 * i, 2) for i in range(21))
CENTER_THRESHOLD_PX = 20.0
NORM_CENTER_THRESHOLD = 0.2

ORACLE_SIZE_LIMIT = 8

STATIONARY = "stationary"
DYNAMIC = "dynamic"


@dataclass
class GroundTruthInstance:
    """Annotations for one enrolled instance.

    stationary_intervals: list of (start_frame, end_frame, center),
    frames inclusive; the instance sits at `center` throughout.
    boxes_2d: sparse frame -> (x_min, y_min, x_max, y_max).
    visibility: frame -> flag, on the same frames as boxes_2d.
    """

    instance_id: str
    stationary_intervals: list = field(default_factory=list)
    boxes_2d: dict = field(default_factory=dict)
    visibility: dict = field(default_factory=dict)

    def __post_init__(self):
        cleaned = []
        for start, end, center in self.stationary_intervals:
            start, end = int(start), int(end)
            if start > end:
                raise ValueError(f"interval ({start}, {end}) is reversed")
            cleaned.append((start, end, np.asarray(center, dtype=np.float64).reshape(3)))
        cleaned.sort(key=lambda it: it[0])
        for (s0, e0, _), (s1, _, _) in zip(cleaned, cleaned[1:]):
            if s1 <= e0:
                raise ValueError(
                    f"stationary intervals overlap around frames {s1}..{e0}"
                )
        self.stationary_intervals = cleaned

    def center_at(self, frame: int) -> np.ndarray | None:
        for start, end, center in self.stationary_intervals:
            if start <= frame <= end:
                return center
        return None

    def is_stationary(self, frame: int) -> bool:
        return self.center_at(frame) is not None

    def motion_state(self, frame: int) -> str:
        return STATIONARY if self.is_stationary(frame) else DYNAMIC


@dataclass
class EvalConfig:
    thresholds: tuple = DEFAULT_THRESHOLDS
    identity_aware: bool = False
    evaluate_stationary_only: bool = True

    def __post_init__(self):
        ts = tuple(float(t) for t in self.thresholds)
        if not ts:
            raise ValueError("need at least one distance threshold")
        if any(t <= 0 for t in ts):
            raise ValueError(f"thresholds must be positive: {ts}")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError(f"thresholds must be strictly increasing: {ts}")
        self.thresholds = ts


@dataclass
class FrameMatch:
    tp: int
    fp: int
    fn: int
    pairs: list  # (gt_id, pred_id, distance)


def _check_unique_ids(items, side: str):
    ids = [str(i) for i, _ in items]
    if len(set(ids)) != len(ids):
        raise EvaluationError(f"duplicate ids on {side} side: {sorted(ids)}")


def match_frame(gts, preds, tau: float, identity_aware: bool = False) -> FrameMatch:
    """One-to-one matching at a single frame and threshold.

    gts/preds: lists of (id, 3-vector). Distance-based mode greedily
    accepts (gt, pred) pairs by ascending distance (ties by gt id then
    pred id); identity-aware mode pairs same-id entries only.
    """
    if tau <= 0:
        raise EvaluationError(f"threshold must be positive, got {tau}")
    _check_unique_ids(gts, "ground-truth")
    _check_unique_ids(preds, "prediction")
    gt_pts = [(str(i), np.asarray(p, dtype=np.float64).reshape(3)) for i, p in gts]
    pred_pts = [(str(i), np.asarray(p, dtype=np.float64).reshape(3)) for i, p in preds]

    pairs = []
    if identity_aware:
        pred_by_id = {i: p for i, p in pred_pts}
        for gid, gp in gt_pts:
            pp = pred_by_id.get(gid)
            if pp is None:
                continue
            dist = float(np.linalg.norm(gp - pp))
            if dist <= tau:
                pairs.append((gid, gid, dist))
    else:
        candidates = []
        for gid, gp in gt_pts:
            for pid, pp in pred_pts:
                dist = float(np.linalg.norm(gp - pp))
                if dist <= tau:
                    candidates.append((dist, gid, pid))
        candidates.sort()
        matched_gt: set = set()
        matched_pred: set = set()
        for dist, gid, pid in candidates:
            if gid in matched_gt or pid in matched_pred:
                continue
            matched_gt.add(gid)
            matched_pred.add(pid)
            pairs.append((gid, pid, dist))

    tp = len(pairs)
    fp = len(pred_pts) - tp
    fn = len(gt_pts) - tp
    return FrameMatch(tp=tp, fp=fp, fn=fn, pairs=pairs)


def oracle_match_frame(gts, preds, tau: float) -> tuple[int, int, int]:
    """Exhaustive maximum-cardinality matching (test oracle).

    Enumerates every one-to-one assignment, maximizing the number of
    pairs within tau and, among those, minimizing total distance.
    Limited to ORACLE_SIZE_LIMIT entries per side.
    """
    if tau <= 0:
        raise EvaluationError(f"threshold must be positive, got {tau}")
    _check_unique_ids(gts, "ground-truth")
    _check_unique_ids(preds, "prediction")
    if len(gts) > ORACLE_SIZE_LIMIT or len(preds) > ORACLE_SIZE_LIMIT:
        raise EvaluationError(
            f"oracle limited to {ORACLE_SIZE_LIMIT} per side, "
            f"got {len(gts)} gts / {len(preds)} preds"
        )
    gt_pts = [np.asarray(p, dtype=np.float64).reshape(3) for _, p in gts]
    pred_pts = [np.asarray(p, dtype=np.float64).reshape(3) for _, p in preds]

    dist = np.array(
        [[float(np.linalg.norm(g - p)) for p in pred_pts] for g in gt_pts]
    ).reshape(len(gt_pts), len(pred_pts))

    best_tp = 0
    best_total = 0.0
    n_gt, n_pred = len(gt_pts), len(pred_pts)
    if n_gt == 0 or n_pred == 0:
        return 0, n_pred, n_gt
    # Assign the smaller side into the larger to bound the enumeration.
    swap = n_gt > n_pred
    small, large = (n_pred, n_gt) if swap else (n_gt, n_pred)
    for assignment in itertools.permutations(range(large), small):
        tp = 0
        total = 0.0
        for a, b in enumerate(assignment):
            d = dist[b, a] if swap else dist[a, b]
            if d <= tau:
                tp += 1
                total += d
        if tp > best_tp or (tp == best_tp and total < best_total):
            best_tp, best_total = tp, total
    return best_tp, n_pred - best_tp, n_gt - best_tp


@dataclass
class Metrics2D:
    auc: float
    precision: float
    norm_precision: float
    frame_count: int

    def to_dict(self) -> dict:
        return {
            "auc": self.auc,
            "precision": self.precision,
            "norm_precision": self.norm_precision,
            "frame_count": self.frame_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Metrics2D":
        return cls(
            auc=d["auc"],
            precision=d["precision"],
            norm_precision=d["norm_precision"],
            frame_count=int(d["frame_count"]),
        )


@dataclass
class MetricsReport:
    """Counts and derived metrics for one evaluation run."""

    thresholds: tuple
    tp: tuple
    fp: tuple
    fn: tuple
    mean_l2: float | None
    mean_angular: float | None
    paired_count: int
    metrics_2d: Metrics2D | None = None

    def __post_init__(self):
        self.thresholds = tuple(float(t) for t in self.thresholds)
        self.tp = tuple(int(v) for v in self.tp)
        self.fp = tuple(int(v) for v in self.fp)
        self.fn = tuple(int(v) for v in self.fn)
        n = len(self.thresholds)
        if not (len(self.tp) == len(self.fp) == len(self.fn) == n):
            raise ValueError("per-threshold count lists must align with thresholds")
        if any(v < 0 for v in self.tp + self.fp + self.fn):
            raise ValueError("counts must be non-negative")

    def precision(self, i: int) -> float | None:
        """None means undefined: zero predictions at this threshold."""
        denom = self.tp[i] + self.fp[i]
        return None if denom == 0 else self.tp[i] / denom

    def recall(self, i: int) -> float | None:
        denom = self.tp[i] + self.fn[i]
        return None if denom == 0 else self.tp[i] / denom

    def to_dict(self) -> dict:
        return {
            "thresholds": list(self.thresholds),
            "tp": list(self.tp),
            "fp": list(self.fp),
            "fn": list(self.fn),
            "precision": [self.precision(i) for i in range(len(self.thresholds))],
            "recall": [self.recall(i) for i in range(len(self.thresholds))],
            "mean_l2": self.mean_l2,
            "mean_angular": self.mean_angular,
            "paired_count": self.paired_count,
            "metrics_2d": self.metrics_2d.to_dict() if self.metrics_2d else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        m2d = d.get("metrics_2d")
        return cls(
            thresholds=tuple(d["thresholds"]),
            tp=tuple(d["tp"]),
            fp=tuple(d["fp"]),
            fn=tuple(d["fn"]),
            mean_l2=d["mean_l2"],
            mean_angular=d["mean_angular"],
            paired_count=int(d["paired_count"]),
            metrics_2d=Metrics2D.from_dict(m2d) if m2d else None,
        )

    @classmethod
    def from_json(cls, text: str) -> "MetricsReport":
        return cls.from_dict(json.loads(text))


def accumulate_pr(
    gt_instances,
    trajectories,
    cfg: EvalConfig,
    poses=None,
    num_frames: int | None = None,
) -> MetricsReport:
    """Micro-averaged protocol over all instances and frames.

    Args:
        gt_instances: list of GroundTruthInstance.
        trajectories: instance id -> Trajectory (or frame -> point map).
        poses: optional frame -> CameraPose (needed for angular error).
        num_frames: evaluation horizon; frames at or beyond it are a
            frame-index mismatch. Defaults to one past the last frame
            seen on either side.
    """
    preds_by_id = {str(k): _as_frame_map(v) for k, v in trajectories.items()}
    gt_by_id = {g.instance_id: g for g in gt_instances}
    if len(gt_by_id) != len(gt_instances):
        raise EvaluationError("duplicate ground-truth instance ids")

    max_seen = -1
    for g in gt_instances:
        for _, end, _ in g.stationary_intervals:
            max_seen = max(max_seen, end)
    for frames in preds_by_id.values():
        if frames:
            max_seen = max(max_seen, max(frames))
    if num_frames is None:
        num_frames = max_seen + 1
    elif max_seen >= num_frames:
        raise EvaluationError(
            f"frame index {max_seen} outside evaluation horizon {num_frames}"
        )

    tp = [0] * len(cfg.thresholds)
    fp = [0] * len(cfg.thresholds)
    fn = [0] * len(cfg.thresholds)
    l2_sum = 0.0
    ang_sum = 0.0
    paired = 0
    ang_defined = poses is not None

    for frame in range(num_frames):
        gts = []
        for g in gt_instances:
            center = g.center_at(frame)
            if center is not None:
                gts.append((g.instance_id, center))
        preds = []
        for pid, frames in preds_by_id.items():
            point = frames.get(frame)
            if point is None:
                continue
            if cfg.evaluate_stationary_only:
                gt = gt_by_id.get(pid)
                if gt is None or not gt.is_stationary(frame):
                    continue
            preds.append((pid, point))
        if not gts and not preds:
            continue
        for i, tau in enumerate(cfg.thresholds):
            result = match_frame(gts, preds, tau, cfg.identity_aware)
            tp[i] += result.tp
            fp[i] += result.fp
            fn[i] += result.fn
        # Paired errors are identity-paired regardless of matching mode.
        for gid, center in gts:
            point = preds_by_id.get(gid, {}).get(frame)
            if point is None:
                continue
            paired += 1
            l2_sum += float(np.linalg.norm(center - np.asarray(point, dtype=np.float64)))
            if ang_defined:
                pose = _pose_at(poses, frame)
                if pose is None:
                    ang_defined = False
                else:
                    ang_sum += angular_error(center, point, pose)

    return MetricsReport(
        thresholds=cfg.thresholds,
        tp=tuple(tp),
        fp=tuple(fp),
        fn=tuple(fn),
        mean_l2=(l2_sum / paired) if paired else None,
        mean_angular=(ang_sum / paired) if paired and ang_defined else None,
        paired_count=paired,
    )


def paired_errors(gt_traj, pred_traj, poses) -> tuple[float | None, float | None, int]:
    """Mean L2 / angular error over frames where both sides have a
    location. Returns (None, None, 0) when nothing is paired."""
    gt_map = _as_frame_map(gt_traj)
    pred_map = _as_frame_map(pred_traj)
    common = sorted(set(gt_map) & set(pred_map))
    if not common:
        return None, None, 0
    l2_sum = 0.0
    ang_sum = 0.0
    ang_defined = poses is not None
    for frame in common:
        g = np.asarray(gt_map[frame], dtype=np.float64)
        p = np.asarray(pred_map[frame], dtype=np.float64)
        l2_sum += float(np.linalg.norm(g - p))
        if ang_defined:
            pose = _pose_at(poses, frame)
            if pose is None:
                ang_defined = False
            else:
                ang_sum += angular_error(g, p, pose)
    n = len(common)
    return l2_sum / n, (ang_sum / n) if ang_defined else None, n


def bbox_iou(a, b) -> float:
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    ix0, iy0 = max(ax0, bx0), max(ay0, by0)
    ix1, iy1 = min(ax1, bx1), min(ay1, by1)
    iw, ih = max(0.0, ix1 - ix0), max(0.0, iy1 - iy0)
    inter = iw * ih
    if inter == 0:
        return 0.0
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union


def metrics_2d(pred_boxes, gt_boxes) -> Metrics2D:
    """Overlap AUC plus center-distance precisions on gt-annotated
    frames. A missing prediction on a gt frame fails every threshold."""
    frames = sorted(gt_boxes)
    n = len(frames)
    if n == 0:
        return Metrics2D(auc=0.0, precision=0.0, norm_precision=0.0, frame_count=0)
    success = np.zeros(len(IOU_GRID))
    prec_hits = 0
    norm_hits = 0
    for frame in frames:
        gt = gt_boxes[frame]
        pred = pred_boxes.get(frame)
        if pred is None:
            continue
        iou = bbox_iou(pred, gt)
        for k, theta in enumerate(IOU_GRID):
            if iou >= theta:
                success[k] += 1
        gcx, gcy = 0.5 * (gt[0] + gt[2]), 0.5 * (gt[1] + gt[3])
        pcx, pcy = 0.5 * (pred[0] + pred[2]), 0.5 * (pred[1] + pred[3])
        du, dv = pcx - gcx, pcy - gcy
        if float(np.hypot(du, dv)) <= CENTER_THRESHOLD_PX:
            prec_hits += 1
        gw, gh = gt[2] - gt[0], gt[3] - gt[1]
        if float(np.hypot(du / gw, dv / gh)) <= NORM_CENTER_THRESHOLD:
            norm_hits += 1
    return Metrics2D(
        auc=float(success.mean() / n),
        precision=prec_hits / n,
        norm_precision=norm_hits / n,
        frame_count=n,
    )


def format_report_table(report: MetricsReport, label: str = "tracker") -> str:
    """Plain-text table: precision/recall columns per threshold, then
    mean L2 and angular error."""

    def fmt(value: float | None, scale: float = 100.0) -> str:
        return "  n/a" if value is None else f"{scale * value:5.1f}"

    taus = report.thresholds
    header_groups = (
        " " * 16
        + "Precision(%)".center(6 * len(taus))
        + " " + "Recall(%)".center(6 * len(taus))
        + "   L2(m)  Angle(rad)"
    )
    header_taus = (
        f"{'Model':<16}"
        + "".join(f"{t:>6.2f}" for t in taus)
        + " "
        + "".join(f"{t:>6.2f}" for t in taus)
        + ""
    )
    row = f"{label:<16}"
    for i in range(len(taus)):
        row += f" {fmt(report.precision(i))}"
    row += " "
    for i in range(len(taus)):
        row += f" {fmt(report.recall(i))}"
    row += "   "
    row += "  n/a" if report.mean_l2 is None else f"{report.mean_l2:5.2f}"
    row += "   "
    row += "   n/a" if report.mean_angular is None else f"{report.mean_angular:7.2f}"
    lines = [header_groups, header_taus, row]
    if report.metrics_2d is not None:
        m = report.metrics_2d
        lines.append(
            f"2D: AUC(%) {100 * m.auc:5.1f}  N.Prec(%) {100 * m.norm_precision:5.1f}"
            f"  Prec(%) {100 * m.precision:5.1f}  on {m.frame_count} frames"
        )
    return "\n".join(lines)


def _as_frame_map(traj) -> dict:
    """Accept a Trajectory or a plain {frame: point} mapping."""
    if hasattr(traj, "items") and not hasattr(traj, "point_at"):
        return {int(f): np.asarray(p, dtype=np.float64) for f, p in traj.items()}
    return {int(f): e.point for f, e in traj.items()}


def _pose_at(poses, frame: int) -> CameraPose | None:
    if isinstance(poses, dict):
        return poses.get(frame)
    if 0 <= frame < len(poses):
        return poses[frame]
    return None
