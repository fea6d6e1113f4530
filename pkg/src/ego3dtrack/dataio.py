"""On-disk formats for poses, depth, proposals, annotations, enrollment,
trajectories, and metric reports.

Text formats are ASCII, whitespace-separated, with `#` comments. Binary
values are little-endian. Every reader accepts a path or an open file
and raises only DataIOError subclasses on bad input, however mangled;
every writer is atomic (write to a temp file, then rename) and
round-trips losslessly through its reader.

Float fields are written with shortest round-trip formatting (repr), so
write -> read is exact.
"""

from __future__ import annotations

import contextlib
import hashlib
import json
import os
import struct
import tempfile
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataIOError, DataValidationError, FormatError
from .evaluation import GroundTruthInstance, MetricsReport
from .geometry import (
    CameraIntrinsics,
    CameraPose,
    DepthMap,
    quaternion_to_rotation,
    rotation_to_quaternion,
)
from .tracking import PROVENANCES, Proposal, Trajectory

DEPTH_MAGIC = b"D3EG"
SVOE_MIN_BBOX_AREA = 500.0  # px^2; smaller enrollment boxes only warn
EMBEDDING_NORM_RANGE = (0.99, 1.01)
MAX_EMBEDDING_DIM = 4096
_MAX_TOKEN_LEN = 64


# ---------------------------------------------------------------------------
# Shared plumbing


@contextlib.contextmanager
def _open_for_read(src, binary: bool):
    if hasattr(src, "read"):
        yield src, getattr(src, "name", "<stream>")
        return
    path = Path(src)
    mode = "rb" if binary else "r"
    try:
        f = open(path, mode, encoding=None if binary else "utf-8")
    except OSError as exc:
        raise FormatError(f"cannot open: {exc}", path=path) from exc
    try:
        yield f, path
    finally:
        f.close()


def atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def _fmt(x: float) -> str:
    return repr(float(x))


def _tokenized_lines(f, path):
    """Yield (line_number, tokens), skipping blanks and # comments."""
    try:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            yield lineno, line.split()
    except UnicodeDecodeError as exc:
        raise FormatError(f"not valid UTF-8 text: {exc}", path=path) from exc


def _parse_float(tok: str, what: str, path, lineno) -> float:
    if len(tok) > _MAX_TOKEN_LEN:
        raise FormatError(f"{what} token too long", path=path, line=lineno)
    try:
        value = float(tok)
    except ValueError as exc:
        raise FormatError(f"bad {what} {tok!r}", path=path, line=lineno) from exc
    if not np.isfinite(value):
        raise FormatError(f"{what} must be finite, got {tok!r}", path=path, line=lineno)
    return value


def _parse_int(tok: str, what: str, path, lineno, minimum: int | None = None) -> int:
    if len(tok) > _MAX_TOKEN_LEN:
        raise FormatError(f"{what} token too long", path=path, line=lineno)
    try:
        value = int(tok)
    except ValueError as exc:
        raise FormatError(f"bad {what} {tok!r}", path=path, line=lineno) from exc
    if minimum is not None and value < minimum:
        raise FormatError(f"{what} must be >= {minimum}, got {value}", path=path, line=lineno)
    return value


@contextlib.contextmanager
def _reader_boundary(path, kind: str):
    """Convert any stray exception into a structured format error."""
    try:
        yield
    except DataIOError:
        raise
    except Exception as exc:
        raise FormatError(f"invalid {kind} file: {exc!r}", path=path) from exc


# ---------------------------------------------------------------------------
# Intrinsics: single line `fx fy cx cy width height`


def write_intrinsics(path, intr: CameraIntrinsics) -> None:
    text = (
        "# pinhole intrinsics: fx fy cx cy width height\n"
        f"{_fmt(intr.fx)} {_fmt(intr.fy)} {_fmt(intr.cx)} {_fmt(intr.cy)} "
        f"{intr.width} {intr.height}\n"
    )
    atomic_write_text(path, text)


def read_intrinsics(src) -> CameraIntrinsics:
    with _open_for_read(src, binary=False) as (f, path):
        with _reader_boundary(path, "intrinsics"):
            rows = list(_tokenized_lines(f, path))
            if len(rows) != 1:
                raise FormatError(f"expected exactly one record, got {len(rows)}", path=path)
            lineno, toks = rows[0]
            if len(toks) != 6:
                raise FormatError("expected 6 fields", path=path, line=lineno)
            fx = _parse_float(toks[0], "fx", path, lineno)
            fy = _parse_float(toks[1], "fy", path, lineno)
            cx = _parse_float(toks[2], "cx", path, lineno)
            cy = _parse_float(toks[3], "cy", path, lineno)
            w = _parse_int(toks[4], "width", path, lineno, minimum=1)
            h = _parse_int(toks[5], "height", path, lineno, minimum=1)
            try:
                return CameraIntrinsics(fx=fx, fy=fy, cx=cx, cy=cy, width=w, height=h)
            except ValueError as exc:
                raise DataValidationError(str(exc), path=path, line=lineno) from exc


# ---------------------------------------------------------------------------
# Poses: one line per frame `frame tx ty tz qx qy qz qw`


def write_poses(path, poses) -> None:
    lines = ["# camera poses: frame tx ty tz qx qy qz qw (world-from-camera)"]
    for pose in poses:
        qx, qy, qz, qw = rotation_to_quaternion(pose.rotation)
        t = pose.translation
        lines.append(
            f"{int(pose.timestamp)} {_fmt(t[0])} {_fmt(t[1])} {_fmt(t[2])} "
            f"{_fmt(qx)} {_fmt(qy)} {_fmt(qz)} {_fmt(qw)}"
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_poses(src) -> list[CameraPose]:
    with _open_for_read(src, binary=False) as (f, path):
        with _reader_boundary(path, "poses"):
            poses = []
            last_frame = None
            for lineno, toks in _tokenized_lines(f, path):
                if len(toks) != 8:
                    raise FormatError("expected 8 fields", path=path, line=lineno)
                frame = _parse_int(toks[0], "frame", path, lineno, minimum=0)
                if last_frame is not None and frame <= last_frame:
                    raise DataValidationError(
                        f"frame {frame} not after {last_frame}", path=path, line=lineno
                    )
                last_frame = frame
                vals = [_parse_float(t, "pose value", path, lineno) for t in toks[1:]]
                tx, ty, tz, qx, qy, qz, qw = vals
                norm = float(np.sqrt(qx * qx + qy * qy + qz * qz + qw * qw))
                if abs(norm - 1.0) > 1e-3:
                    raise DataValidationError(
                        f"quaternion norm {norm:.6f} is not 1", path=path, line=lineno
                    )
                rotation = quaternion_to_rotation(qx, qy, qz, qw)
                poses.append(
                    CameraPose(rotation=rotation, translation=[tx, ty, tz], timestamp=frame)
                )
            return poses


# ---------------------------------------------------------------------------
# Depth maps: D3EG magic, u32 width, u32 height, then float32 row-major


def write_depth(path, depth: DepthMap) -> None:
    header = DEPTH_MAGIC + struct.pack("<II", depth.width, depth.height)
    payload = np.ascontiguousarray(depth.values, dtype="<f4").tobytes()
    atomic_write_bytes(path, header + payload)


def read_depth(src) -> DepthMap:
    with _open_for_read(src, binary=True) as (f, path):
        with _reader_boundary(path, "depth"):
            header = f.read(12)
            if len(header) < 12 or header[:4] != DEPTH_MAGIC:
                raise FormatError("bad magic or truncated header", path=path)
            width, height = struct.unpack("<II", header[4:12])
            if width == 0 or height == 0:
                raise FormatError(f"degenerate size {width}x{height}", path=path)
            payload = f.read()
            expected = 4 * width * height
            if len(payload) != expected:
                raise FormatError(
                    f"payload is {len(payload)} bytes, expected {expected}", path=path
                )
            values = np.frombuffer(payload, dtype="<f4").reshape(height, width)
            try:
                return DepthMap(values=values.copy())
            except ValueError as exc:
                raise DataValidationError(str(exc), path=path) from exc


# ---------------------------------------------------------------------------
# Proposals: `dim D` header, then `frame x0 y0 x1 y1 score e1..eD`


def write_proposals(path, proposals_by_frame: dict) -> None:
    first = next(
        (p for frame in sorted(proposals_by_frame) for p in proposals_by_frame[frame]), None
    )
    if first is None:
        raise ValueError("cannot infer embedding dimension from zero proposals")
    dim = first.embedding.shape[0]
    lines = [
        "# proposals: frame x_min y_min x_max y_max score embedding...",
        f"dim {dim}",
    ]
    for frame in sorted(proposals_by_frame):
        for p in proposals_by_frame[frame]:
            bbox = " ".join(_fmt(v) for v in p.bbox)
            emb = " ".join(_fmt(v) for v in p.embedding)
            lines.append(f"{int(frame)} {bbox} {_fmt(p.score)} {emb}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_proposals(src) -> dict[int, list[Proposal]]:
    """Parse proposals grouped by frame. Records may appear in any
    frame order; grouping is a stable sort. Embeddings with L2 norm
    outside [0.99, 1.01] are rejected, others re-normalized."""
    with _open_for_read(src, binary=False) as (f, path):
        with _reader_boundary(path, "proposals"):
            dim = None
            records: list[tuple[int, Proposal]] = []
            for lineno, toks in _tokenized_lines(f, path):
                if dim is None:
                    if len(toks) != 2 or toks[0] != "dim":
                        raise FormatError(
                            "first record must be `dim <embedding dimension>`",
                            path=path,
                            line=lineno,
                        )
                    dim = _parse_int(toks[1], "dimension", path, lineno, minimum=1)
                    if dim > MAX_EMBEDDING_DIM:
                        raise FormatError(
                            f"dimension {dim} exceeds limit {MAX_EMBEDDING_DIM}",
                            path=path,
                            line=lineno,
                        )
                    continue
                if len(toks) != 6 + dim:
                    raise FormatError(
                        f"expected {6 + dim} fields for dim {dim}, got {len(toks)}",
                        path=path,
                        line=lineno,
                    )
                frame = _parse_int(toks[0], "frame", path, lineno, minimum=0)
                bbox = tuple(
                    _parse_float(t, "bbox coordinate", path, lineno) for t in toks[1:5]
                )
                score = _parse_float(toks[5], "score", path, lineno)
                emb = np.array(
                    [_parse_float(t, "embedding value", path, lineno) for t in toks[6:]],
                    dtype=np.float64,
                )
                norm = float(np.linalg.norm(emb))
                if not EMBEDDING_NORM_RANGE[0] <= norm <= EMBEDDING_NORM_RANGE[1]:
                    raise DataValidationError(
                        f"embedding norm {norm:.4f} outside {EMBEDDING_NORM_RANGE}",
                        path=path,
                        line=lineno,
                    )
                try:
                    prop = Proposal(bbox=bbox, score=score, embedding=emb / norm)
                except ValueError as exc:
                    raise DataValidationError(str(exc), path=path, line=lineno) from exc
                records.append((frame, prop))
            if dim is None:
                raise FormatError("missing `dim` header", path=path)
            records.sort(key=lambda r: r[0])  # stable: keeps in-file order per frame
            by_frame: dict[int, list[Proposal]] = {}
            for frame, prop in records:
                by_frame.setdefault(frame, []).append(prop)
            return by_frame


# ---------------------------------------------------------------------------
# Annotations: headers `num_frames N` / `image_size W H`, then per
# instance: `instance ID`, `interval START END X Y Z`,
# `box FRAME X0 Y0 X1 Y1 VISIBLE`


@dataclass
class AnnotationSet:
    instances: list
    num_frames: int
    image_size: tuple[int, int] | None = None

    def by_id(self) -> dict:
        return {g.instance_id: g for g in self.instances}


def write_annotations(path, annotations: AnnotationSet) -> None:
    lines = [
        "# annotations: stationary intervals with 3-D centers, sparse 2-D boxes",
        f"num_frames {annotations.num_frames}",
    ]
    if annotations.image_size is not None:
        lines.append(f"image_size {annotations.image_size[0]} {annotations.image_size[1]}")
    for inst in annotations.instances:
        lines.append(f"instance {inst.instance_id}")
        for start, end, center in inst.stationary_intervals:
            c = " ".join(_fmt(v) for v in center)
            lines.append(f"interval {start} {end} {c}")
        for frame in sorted(inst.boxes_2d):
            bbox = " ".join(_fmt(v) for v in inst.boxes_2d[frame])
            vis = 1 if inst.visibility.get(frame, True) else 0
            lines.append(f"box {frame} {bbox} {vis}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_annotations(src) -> AnnotationSet:
    with _open_for_read(src, binary=False) as (f, path):
        with _reader_boundary(path, "annotations"):
            num_frames = None
            image_size = None
            instances = []
            current = None  # (id, intervals, boxes, visibility)

            def flush():
                if current is None:
                    return
                try:
                    instances.append(
                        GroundTruthInstance(
                            instance_id=current[0],
                            stationary_intervals=current[1],
                            boxes_2d=current[2],
                            visibility=current[3],
                        )
                    )
                except ValueError as exc:
                    raise DataValidationError(str(exc), path=path) from exc

            for lineno, toks in _tokenized_lines(f, path):
                kind = toks[0]
                if kind == "num_frames":
                    if len(toks) != 2:
                        raise FormatError("num_frames takes one value", path=path, line=lineno)
                    num_frames = _parse_int(toks[1], "num_frames", path, lineno, minimum=1)
                elif kind == "image_size":
                    if len(toks) != 3:
                        raise FormatError("image_size takes two values", path=path, line=lineno)
                    image_size = (
                        _parse_int(toks[1], "width", path, lineno, minimum=1),
                        _parse_int(toks[2], "height", path, lineno, minimum=1),
                    )
                elif kind == "instance":
                    if len(toks) != 2:
                        raise FormatError("instance takes one id", path=path, line=lineno)
                    flush()
                    current = (toks[1], [], {}, {})
                elif kind == "interval":
                    if current is None:
                        raise FormatError("interval before any instance", path=path, line=lineno)
                    if len(toks) != 6:
                        raise FormatError("expected `interval start end x y z`", path=path, line=lineno)
                    start = _parse_int(toks[1], "start", path, lineno, minimum=0)
                    end = _parse_int(toks[2], "end", path, lineno, minimum=0)
                    center = [_parse_float(t, "center", path, lineno) for t in toks[3:6]]
                    current[1].append((start, end, center))
                elif kind == "box":
                    if current is None:
                        raise FormatError("box before any instance", path=path, line=lineno)
                    if len(toks) != 7:
                        raise FormatError(
                            "expected `box frame x0 y0 x1 y1 visible`", path=path, line=lineno
                        )
                    frame = _parse_int(toks[1], "frame", path, lineno, minimum=0)
                    bbox = tuple(_parse_float(t, "bbox", path, lineno) for t in toks[2:6])
                    if not (bbox[0] < bbox[2] and bbox[1] < bbox[3]):
                        raise DataValidationError(f"degenerate box {bbox}", path=path, line=lineno)
                    if image_size is not None:
                        if bbox[0] < 0 or bbox[1] < 0 or bbox[2] > image_size[0] or bbox[3] > image_size[1]:
                            raise DataValidationError(
                                f"box {bbox} outside image {image_size}", path=path, line=lineno
                            )
                    visible = _parse_int(toks[6], "visible flag", path, lineno)
                    if visible not in (0, 1):
                        raise FormatError("visible flag must be 0 or 1", path=path, line=lineno)
                    if frame in current[2]:
                        raise DataValidationError(
                            f"duplicate box for frame {frame}", path=path, line=lineno
                        )
                    current[2][frame] = bbox
                    current[3][frame] = bool(visible)
                else:
                    raise FormatError(f"unknown record kind {kind!r}", path=path, line=lineno)
            flush()
            if num_frames is None:
                raise FormatError("missing num_frames header", path=path)
            ids = [g.instance_id for g in instances]
            if len(set(ids)) != len(ids):
                raise DataValidationError("duplicate instance ids", path=path)
            for g in instances:
                for _, end, _ in g.stationary_intervals:
                    if end >= num_frames:
                        raise DataValidationError(
                            f"interval end {end} beyond num_frames {num_frames}", path=path
                        )
            return AnnotationSet(instances=instances, num_frames=num_frames, image_size=image_size)


# ---------------------------------------------------------------------------
# Enrollment


@dataclass
class SvoeRecord:
    instance_id: str
    frame: int
    bbox: tuple[float, float, float, float]


def write_enrollment_svoe(path, records) -> None:
    lines = ["# single-view online enrollment: svoe id frame x0 y0 x1 y1"]
    for r in records:
        bbox = " ".join(_fmt(v) for v in r.bbox)
        lines.append(f"svoe {r.instance_id} {int(r.frame)} {bbox}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_enrollment_svoe(src) -> list[SvoeRecord]:
    with _open_for_read(src, binary=False) as (f, path):
        with _reader_boundary(path, "svoe enrollment"):
            records = []
            seen = set()
            for lineno, toks in _tokenized_lines(f, path):
                if toks[0] != "svoe" or len(toks) != 7:
                    raise FormatError("expected `svoe id frame x0 y0 x1 y1`", path=path, line=lineno)
                instance_id = toks[1]
                if instance_id in seen:
                    raise DataValidationError(
                        f"duplicate enrollment for {instance_id!r}", path=path, line=lineno
                    )
                seen.add(instance_id)
                frame = _parse_int(toks[2], "frame", path, lineno, minimum=0)
                bbox = tuple(_parse_float(t, "bbox", path, lineno) for t in toks[3:7])
                if not (bbox[0] < bbox[2] and bbox[1] < bbox[3]):
                    raise DataValidationError(f"degenerate box {bbox}", path=path, line=lineno)
                area = (bbox[2] - bbox[0]) * (bbox[3] - bbox[1])
                if area < SVOE_MIN_BBOX_AREA:
                    warnings.warn(
                        f"enrollment box for {instance_id!r} is {area:.0f} px^2, "
                        f"below the recommended {SVOE_MIN_BBOX_AREA:.0f}",
                        stacklevel=2,
                    )
                records.append(SvoeRecord(instance_id=instance_id, frame=frame, bbox=bbox))
            return records


@dataclass
class MvpeEnrollment:
    dim: int
    views: dict = field(default_factory=dict)  # id -> list of unit embeddings
    image_paths: dict = field(default_factory=dict)  # id -> list of paths


def write_enrollment_mvpe(path, enrollment: MvpeEnrollment) -> None:
    lines = [
        "# multi-view pre-enrollment: `view id e1..eD` or `view_path id path`",
        f"dim {enrollment.dim}",
    ]
    for instance_id in sorted(enrollment.views):
        for emb in enrollment.views[instance_id]:
            vals = " ".join(_fmt(v) for v in emb)
            lines.append(f"view {instance_id} {vals}")
    for instance_id in sorted(enrollment.image_paths):
        for p in enrollment.image_paths[instance_id]:
            lines.append(f"view_path {instance_id} {p}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_enrollment_mvpe(src) -> MvpeEnrollment:
    with _open_for_read(src, binary=False) as (f, path):
        with _reader_boundary(path, "mvpe enrollment"):
            dim = None
            views: dict = {}
            image_paths: dict = {}
            for lineno, toks in _tokenized_lines(f, path):
                if dim is None:
                    if len(toks) != 2 or toks[0] != "dim":
                        raise FormatError(
                            "first record must be `dim <embedding dimension>`",
                            path=path,
                            line=lineno,
                        )
                    dim = _parse_int(toks[1], "dimension", path, lineno, minimum=1)
                    if dim > MAX_EMBEDDING_DIM:
                        raise FormatError(f"dimension {dim} too large", path=path, line=lineno)
                    continue
                if toks[0] == "view":
                    if len(toks) != 2 + dim:
                        raise FormatError(
                            f"expected {2 + dim} fields for dim {dim}", path=path, line=lineno
                        )
                    emb = np.array(
                        [_parse_float(t, "embedding value", path, lineno) for t in toks[2:]],
                        dtype=np.float64,
                    )
                    norm = float(np.linalg.norm(emb))
                    if not EMBEDDING_NORM_RANGE[0] <= norm <= EMBEDDING_NORM_RANGE[1]:
                        raise DataValidationError(
                            f"embedding norm {norm:.4f} outside {EMBEDDING_NORM_RANGE}",
                            path=path,
                            line=lineno,
                        )
                    views.setdefault(toks[1], []).append(emb / norm)
                elif toks[0] == "view_path":
                    if len(toks) != 3:
                        raise FormatError("expected `view_path id path`", path=path, line=lineno)
                    image_paths.setdefault(toks[1], []).append(toks[2])
                else:
                    raise FormatError(f"unknown record kind {toks[0]!r}", path=path, line=lineno)
            if dim is None:
                raise FormatError("missing `dim` header", path=path)
            return MvpeEnrollment(dim=dim, views=views, image_paths=image_paths)


# ---------------------------------------------------------------------------
# Trajectories: `traj id frame x y z provenance`


def write_trajectories(path, trajectories: dict) -> None:
    lines = ["# trajectories: traj id frame x y z provenance"]
    for instance_id in sorted(trajectories):
        for frame, entry in trajectories[instance_id].items():
            p = entry.point
            lines.append(
                f"traj {instance_id} {frame} {_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])} "
                f"{entry.provenance}"
            )
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_trajectories(src) -> dict[str, Trajectory]:
    with _open_for_read(src, binary=False) as (f, path):
        with _reader_boundary(path, "trajectories"):
            rows: dict[str, list] = {}
            for lineno, toks in _tokenized_lines(f, path):
                if toks[0] != "traj" or len(toks) != 7:
                    raise FormatError(
                        "expected `traj id frame x y z provenance`", path=path, line=lineno
                    )
                frame = _parse_int(toks[2], "frame", path, lineno, minimum=0)
                point = [_parse_float(t, "coordinate", path, lineno) for t in toks[3:6]]
                if toks[6] not in PROVENANCES:
                    raise FormatError(f"unknown provenance {toks[6]!r}", path=path, line=lineno)
                rows.setdefault(toks[1], []).append((frame, point, toks[6], lineno))
            result: dict[str, Trajectory] = {}
            for instance_id, entries in rows.items():
                entries.sort(key=lambda e: e[0])
                traj = Trajectory()
                for frame, point, provenance, lineno in entries:
                    try:
                        traj.add(frame, point, provenance)
                    except ValueError as exc:
                        raise DataValidationError(str(exc), path=path, line=lineno) from exc
                result[instance_id] = traj
            return result


# ---------------------------------------------------------------------------
# Metric reports (JSON)


def write_report(path, report: MetricsReport) -> None:
    atomic_write_text(path, report.to_json() + "\n")


def read_report(src) -> MetricsReport:
    with _open_for_read(src, binary=False) as (f, path):
        with _reader_boundary(path, "metrics report"):
            try:
                data = json.load(f)
            except (json.JSONDecodeError, UnicodeDecodeError) as exc:
                raise FormatError(f"not valid JSON: {exc}", path=path) from exc
            try:
                return MetricsReport.from_dict(data)
            except (KeyError, TypeError, ValueError) as exc:
                raise DataValidationError(f"bad report structure: {exc!r}", path=path) from exc


# ---------------------------------------------------------------------------
# Dataset layout


@dataclass
class DatasetLayout:
    """Standard file layout under one dataset root."""

    root: Path

    def __post_init__(self):
        self.root = Path(self.root)

    @property
    def intrinsics_file(self) -> Path:
        return self.root / "intrinsics.txt"

    @property
    def poses_file(self) -> Path:
        return self.root / "poses.txt"

    @property
    def depth_dir(self) -> Path:
        return self.root / "depth"

    def depth_file(self, frame: int) -> Path:
        return self.depth_dir / f"frame_{frame:06d}.depth"

    @property
    def proposals_file(self) -> Path:
        return self.root / "proposals.txt"

    @property
    def annotations_file(self) -> Path:
        return self.root / "annotations.txt"

    @property
    def svoe_file(self) -> Path:
        return self.root / "enrollment_svoe.txt"

    @property
    def mvpe_file(self) -> Path:
        return self.root / "enrollment_mvpe.txt"

    @property
    def spec_file(self) -> Path:
        return self.root / "scene_spec.json"

    @property
    def manifest_file(self) -> Path:
        return self.root / "manifest.json"


@dataclass
class Dataset:
    """A dataset loaded into memory (depth maps stay on disk)."""

    layout: DatasetLayout
    intrinsics: CameraIntrinsics
    poses: list
    proposals: dict
    annotations: AnnotationSet
    svoe: list | None
    mvpe: MvpeEnrollment | None

    @property
    def num_frames(self) -> int:
        return self.annotations.num_frames

    def pose(self, frame: int) -> CameraPose:
        return self.poses[frame]

    def depth(self, frame: int) -> DepthMap:
        return read_depth(self.layout.depth_file(frame))

    def frame_inputs(self):
        """Yield (proposals, DepthMap, CameraPose) per frame, the input
        shape the tracker consumes."""
        for pose in self.poses:
            frame = pose.timestamp
            yield self.proposals.get(frame, []), self.depth(frame), pose


def load_dataset(root) -> Dataset:
    """Read and cross-validate a dataset directory."""
    layout = DatasetLayout(root)
    intrinsics = read_intrinsics(layout.intrinsics_file)
    poses = read_poses(layout.poses_file)
    if not poses:
        raise DataValidationError("dataset has no poses", path=layout.poses_file)
    frames = [p.timestamp for p in poses]
    if frames != list(range(len(frames))):
        raise DataValidationError(
            "pose frames must be contiguous from 0", path=layout.poses_file
        )
    for frame in frames:
        if not layout.depth_file(frame).exists():
            raise DataValidationError(
                f"missing depth file for frame {frame}", path=layout.depth_file(frame)
            )
    proposals = read_proposals(layout.proposals_file)
    annotations = read_annotations(layout.annotations_file)
    if annotations.num_frames != len(poses):
        raise DataValidationError(
            f"annotations cover {annotations.num_frames} frames but poses cover {len(poses)}",
            path=layout.annotations_file,
        )
    bad = [f for f in proposals if f >= len(poses)]
    if bad:
        raise DataValidationError(
            f"proposals reference frames beyond the pose range: {bad[:5]}",
            path=layout.proposals_file,
        )
    svoe = read_enrollment_svoe(layout.svoe_file) if layout.svoe_file.exists() else None
    mvpe = read_enrollment_mvpe(layout.mvpe_file) if layout.mvpe_file.exists() else None
    return Dataset(
        layout=layout,
        intrinsics=intrinsics,
        poses=poses,
        proposals=proposals,
        annotations=annotations,
        svoe=svoe,
        mvpe=mvpe,
    )


# ---------------------------------------------------------------------------
# Manifest


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(root, files) -> dict:
    """Hash the given files (paths relative to root) and write
    manifest.json with a combined digest."""
    root = Path(root)
    entries = {}
    for rel in sorted(str(p) for p in files):
        entries[rel] = sha256_file(root / rel)
    combined = hashlib.sha256(
        "\n".join(f"{k} {v}" for k, v in sorted(entries.items())).encode()
    ).hexdigest()
    manifest = {"files": entries, "combined": combined}
    atomic_write_text(root / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
