"""Synthetic egocentric scene generator.

A scene is an axis-aligned room with spherical object instances and a
camera gliding through waypoints while looking at (interpolated)
targets. Each frame yields exact ground truth plus the sensor streams
the tracker consumes: a camera pose, a rendered depth map (ray-box
walls, billboard discs for instances, optional noise and dropout), and
appearance proposals (one inlier per visible instance with controlled
embedding noise, plus random and look-alike distractor boxes).

Everything is deterministic in the scene seed. Each frame draws from
its own generator seeded by (seed, frame), so frames can be rendered
independently, in any order, with bit-identical results.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import SceneSpecError
from .evaluation import DYNAMIC, STATIONARY
from .geometry import (
    MAX_DEPTH_M,
    CameraIntrinsics,
    CameraPose,
    DepthMap,
    look_at_rotation,
)
from .tracking import Proposal

_VISIBILITY_MARGIN_PX = 2.0
_SVOE_MIN_AREA = 500.0


@dataclass
class Placement:
    """Inclusive frame span during which an instance sits still."""

    start: int
    end: int
    position: np.ndarray

    def __post_init__(self):
        self.start = int(self.start)
        self.end = int(self.end)
        self.position = np.asarray(self.position, dtype=np.float64).reshape(3)


@dataclass
class InstanceSpec:
    instance_id: str
    radius: float
    placements: list
    embedding: np.ndarray | None = None  # filled in by SceneSpec

    def position_and_motion(self, frame: int) -> tuple[np.ndarray, str]:
        """World center and motion state; linear glide between
        placements, clamped at the ends."""
        ps = self.placements
        if frame <= ps[0].start:
            return ps[0].position, (STATIONARY if frame >= ps[0].start else DYNAMIC)
        for k, p in enumerate(ps):
            if p.start <= frame <= p.end:
                return p.position, STATIONARY
            if k + 1 < len(ps) and p.end < frame < ps[k + 1].start:
                t = (frame - p.end) / (ps[k + 1].start - p.end)
                return (1 - t) * p.position + t * ps[k + 1].position, DYNAMIC
        return ps[-1].position, DYNAMIC if frame > ps[-1].end else STATIONARY

    def in_transit(self, frame: int) -> bool:
        return self.position_and_motion(frame)[1] == DYNAMIC


@dataclass
class CameraPathSpec:
    """Positions glide through `waypoints`, the view direction through
    `look_at` targets, both with smoothstep easing per segment."""

    waypoints: list
    look_at: list
    angular_jitter: float = 0.0

    def __post_init__(self):
        self.waypoints = [np.asarray(w, dtype=np.float64).reshape(3) for w in self.waypoints]
        self.look_at = [np.asarray(t, dtype=np.float64).reshape(3) for t in self.look_at]


def _interp_waypoints(points, t: float) -> np.ndarray:
    if len(points) == 1:
        return points[0]
    u = t * (len(points) - 1)
    i = min(int(u), len(points) - 2)
    s = u - i
    s = s * s * (3 - 2 * s)  # smoothstep easing within the segment
    return (1 - s) * points[i] + s * points[i + 1]


@dataclass
class SceneSpec:
    seed: int
    num_frames: int
    room_min: np.ndarray
    room_max: np.ndarray
    intrinsics: CameraIntrinsics
    camera: CameraPathSpec
    instances: list
    embedding_dim: int = 32
    distractor_count: int = 0
    confusable_count: int = 0
    confusable_noise: float = 0.3
    embedding_noise: float = 0.0
    depth_noise: float = 0.0
    depth_dropout: float = 0.0
    # Short-range depth sensing: returns beyond `far_distance` drop out
    # at `far_dropout` instead (range falloff of ToF-style sensors).
    far_distance: float = 0.0  # 0 disables the range knee
    far_dropout: float = 0.0
    hide_in_transit: bool = False
    occlusion: bool = False
    annotation_stride: int = 5
    mvpe_view_count: int = 25
    mvpe_view_noise: float = 0.2

    def __post_init__(self):
        self.room_min = np.asarray(self.room_min, dtype=np.float64).reshape(3)
        self.room_max = np.asarray(self.room_max, dtype=np.float64).reshape(3)
        self._validate()
        self._assign_embeddings()

    def _fail(self, path: str, message: str):
        raise SceneSpecError(f"{path}: {message}")

    def _validate(self):
        if self.seed < 0:
            self._fail("seed", f"must be >= 0, got {self.seed}")
        if self.num_frames < 1:
            self._fail("num_frames", f"must be >= 1, got {self.num_frames}")
        if not np.all(self.room_min < self.room_max):
            self._fail("room", f"min {self.room_min} not below max {self.room_max}")
        if float(np.linalg.norm(self.room_max - self.room_min)) > MAX_DEPTH_M:
            self._fail("room", f"diagonal exceeds the {MAX_DEPTH_M} m depth range")
        for noise_name in ("embedding_noise", "depth_noise", "confusable_noise", "mvpe_view_noise"):
            if getattr(self, noise_name) < 0:
                self._fail(noise_name, "must be >= 0")
        if not 0.0 <= self.depth_dropout < 1.0:
            self._fail("depth_dropout", f"must be in [0, 1), got {self.depth_dropout}")
        if not 0.0 <= self.far_dropout < 1.0:
            self._fail("far_dropout", f"must be in [0, 1), got {self.far_dropout}")
        if self.far_distance < 0:
            self._fail("far_distance", "must be >= 0")
        if self.distractor_count < 0 or self.confusable_count < 0:
            self._fail("distractor_count", "must be >= 0")
        if self.annotation_stride < 1:
            self._fail("annotation_stride", "must be >= 1")
        if self.embedding_dim < 2:
            self._fail("embedding_dim", "must be >= 2")
        if self.mvpe_view_count < 1:
            self._fail("mvpe_view_count", "must be >= 1")
        if not self.camera.waypoints:
            self._fail("camera.waypoints", "need at least one waypoint")
        if not self.camera.look_at:
            self._fail("camera.look_at", "need at least one look-at target")
        if self.camera.angular_jitter < 0:
            self._fail("camera.angular_jitter", "must be >= 0")
        for k, w in enumerate(self.camera.waypoints):
            if not (np.all(w >= self.room_min) and np.all(w <= self.room_max)):
                self._fail(f"camera.waypoints[{k}]", f"{w} outside the room")
        if not self.instances:
            self._fail("instances", "need at least one instance")
        seen = set()
        for k, inst in enumerate(self.instances):
            if inst.instance_id in seen:
                self._fail(f"instances[{k}].instance_id", f"duplicate {inst.instance_id!r}")
            seen.add(inst.instance_id)
            if inst.radius <= 0:
                self._fail(f"instances[{k}].radius", "must be > 0")
            if not inst.placements:
                self._fail(f"instances[{k}].placements", "need at least one placement")
            prev_end = None
            for j, p in enumerate(inst.placements):
                where = f"instances[{k}].placements[{j}]"
                if p.start > p.end:
                    self._fail(where, f"start {p.start} after end {p.end}")
                if p.start < 0 or p.end >= self.num_frames:
                    self._fail(where, f"span ({p.start}, {p.end}) outside 0..{self.num_frames - 1}")
                if prev_end is not None and p.start <= prev_end:
                    self._fail(where, f"overlaps previous placement ending at {prev_end}")
                prev_end = p.end
                if not (np.all(p.position >= self.room_min) and np.all(p.position <= self.room_max)):
                    self._fail(where, f"position {p.position} outside the room")

    def _assign_embeddings(self):
        for k, inst in enumerate(self.instances):
            if inst.embedding is None:
                rng = np.random.default_rng([self.seed, 777_000 + k])
                vec = rng.standard_normal(self.embedding_dim)
                inst.embedding = vec / np.linalg.norm(vec)
            else:
                inst.embedding = np.asarray(inst.embedding, dtype=np.float64).reshape(-1)
                if inst.embedding.shape[0] != self.embedding_dim:
                    self._fail(
                        f"instances[{k}].embedding",
                        f"dimension {inst.embedding.shape[0]} != embedding_dim {self.embedding_dim}",
                    )
                norm = float(np.linalg.norm(inst.embedding))
                if norm < 1e-12:
                    self._fail(f"instances[{k}].embedding", "zero vector")
                inst.embedding = inst.embedding / norm

    # -- camera path (pure functions of the spec) --

    def camera_position(self, frame: int) -> np.ndarray:
        t = 0.0 if self.num_frames == 1 else frame / (self.num_frames - 1)
        return _interp_waypoints(self.camera.waypoints, t)

    def camera_target(self, frame: int) -> np.ndarray:
        t = 0.0 if self.num_frames == 1 else frame / (self.num_frames - 1)
        return _interp_waypoints(self.camera.look_at, t)

    # -- serialization --

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "num_frames": self.num_frames,
            "room": {"min": self.room_min.tolist(), "max": self.room_max.tolist()},
            "intrinsics": {
                "fx": self.intrinsics.fx,
                "fy": self.intrinsics.fy,
                "cx": self.intrinsics.cx,
                "cy": self.intrinsics.cy,
                "width": self.intrinsics.width,
                "height": self.intrinsics.height,
            },
            "camera": {
                "waypoints": [w.tolist() for w in self.camera.waypoints],
                "look_at": [t.tolist() for t in self.camera.look_at],
                "angular_jitter": self.camera.angular_jitter,
            },
            "embedding_dim": self.embedding_dim,
            "instances": [
                {
                    "id": inst.instance_id,
                    "radius": inst.radius,
                    "embedding": inst.embedding.tolist(),
                    "placements": [
                        {"start": p.start, "end": p.end, "position": p.position.tolist()}
                        for p in inst.placements
                    ],
                }
                for inst in self.instances
            ],
            "distractor_count": self.distractor_count,
            "confusable_count": self.confusable_count,
            "confusable_noise": self.confusable_noise,
            "embedding_noise": self.embedding_noise,
            "depth_noise": self.depth_noise,
            "depth_dropout": self.depth_dropout,
            "far_distance": self.far_distance,
            "far_dropout": self.far_dropout,
            "hide_in_transit": self.hide_in_transit,
            "occlusion": self.occlusion,
            "annotation_stride": self.annotation_stride,
            "mvpe_view_count": self.mvpe_view_count,
            "mvpe_view_noise": self.mvpe_view_noise,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SceneSpec":
        def need(mapping, key, path):
            if not isinstance(mapping, dict) or key not in mapping:
                raise SceneSpecError(f"{path}: missing required field {key!r}")
            return mapping[key]

        try:
            intr_d = need(d, "intrinsics", "spec")
            intrinsics = CameraIntrinsics(
                fx=float(need(intr_d, "fx", "intrinsics")),
                fy=float(need(intr_d, "fy", "intrinsics")),
                cx=float(need(intr_d, "cx", "intrinsics")),
                cy=float(need(intr_d, "cy", "intrinsics")),
                width=int(need(intr_d, "width", "intrinsics")),
                height=int(need(intr_d, "height", "intrinsics")),
            )
        except ValueError as exc:
            raise SceneSpecError(f"intrinsics: {exc}") from exc
        cam_d = need(d, "camera", "spec")
        camera = CameraPathSpec(
            waypoints=need(cam_d, "waypoints", "camera"),
            look_at=need(cam_d, "look_at", "camera"),
            angular_jitter=float(cam_d.get("angular_jitter", 0.0)),
        )
        instances = []
        for k, inst_d in enumerate(need(d, "instances", "spec")):
            placements = [
                Placement(
                    start=need(p, "start", f"instances[{k}].placements[{j}]"),
                    end=need(p, "end", f"instances[{k}].placements[{j}]"),
                    position=need(p, "position", f"instances[{k}].placements[{j}]"),
                )
                for j, p in enumerate(need(inst_d, "placements", f"instances[{k}]"))
            ]
            instances.append(
                InstanceSpec(
                    instance_id=str(need(inst_d, "id", f"instances[{k}]")),
                    radius=float(need(inst_d, "radius", f"instances[{k}]")),
                    placements=placements,
                    embedding=inst_d.get("embedding"),
                )
            )
        room = need(d, "room", "spec")
        return cls(
            seed=int(need(d, "seed", "spec")),
            num_frames=int(need(d, "num_frames", "spec")),
            room_min=need(room, "min", "room"),
            room_max=need(room, "max", "room"),
            intrinsics=intrinsics,
            camera=camera,
            instances=instances,
            embedding_dim=int(d.get("embedding_dim", 32)),
            distractor_count=int(d.get("distractor_count", 0)),
            confusable_count=int(d.get("confusable_count", 0)),
            confusable_noise=float(d.get("confusable_noise", 0.3)),
            embedding_noise=float(d.get("embedding_noise", 0.0)),
            depth_noise=float(d.get("depth_noise", 0.0)),
            depth_dropout=float(d.get("depth_dropout", 0.0)),
            far_distance=float(d.get("far_distance", 0.0)),
            far_dropout=float(d.get("far_dropout", 0.0)),
            hide_in_transit=bool(d.get("hide_in_transit", False)),
            occlusion=bool(d.get("occlusion", False)),
            annotation_stride=int(d.get("annotation_stride", 5)),
            mvpe_view_count=int(d.get("mvpe_view_count", 25)),
            mvpe_view_noise=float(d.get("mvpe_view_noise", 0.2)),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SceneSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SceneSpecError(f"spec: not valid JSON: {exc}") from exc
        return cls.from_dict(data)


@dataclass
class InstanceGT:
    visible: bool
    bbox: tuple | None
    center_world: np.ndarray
    motion: str


@dataclass
class FrameBundle:
    frame: int
    pose: CameraPose
    depth: DepthMap
    proposals: list
    gt: dict

    def tracker_input(self):
        return self.proposals, self.depth, self.pose


def _jitter_rotation(rng, sigma: float) -> np.ndarray:
    if sigma == 0:
        # Keep the draw so the stream is identical with or without jitter.
        rng.standard_normal(3)
        return np.eye(3)
    ax, ay, az = rng.standard_normal(3) * sigma
    ca, sa = math.cos(ax), math.sin(ax)
    cb, sb = math.cos(ay), math.sin(ay)
    cc, sc = math.cos(az), math.sin(az)
    rx = np.array([[1, 0, 0], [0, ca, -sa], [0, sa, ca]])
    ry = np.array([[cb, 0, sb], [0, 1, 0], [-sb, 0, cb]])
    rz = np.array([[cc, -sc, 0], [sc, cc, 0], [0, 0, 1]])
    return rz @ ry @ rx


def _wall_depth(spec: SceneSpec, pose: CameraPose) -> np.ndarray:
    """Camera-frame z of the room walls for every pixel (exit of the
    ray from the camera through the axis-aligned room box)."""
    intr = spec.intrinsics
    us = np.arange(intr.width, dtype=np.float64)
    vs = np.arange(intr.height, dtype=np.float64)
    kx = (us[None, :] - intr.cx) / intr.fx
    ky = (vs[:, None] - intr.cy) / intr.fy
    dirs_cam = np.stack(
        [np.broadcast_to(kx, (intr.height, intr.width)),
         np.broadcast_to(ky, (intr.height, intr.width)),
         np.ones((intr.height, intr.width))],
        axis=-1,
    )
    dirs_world = dirs_cam @ pose.rotation.T
    origin = pose.translation
    with np.errstate(divide="ignore", invalid="ignore"):
        t_lo = (spec.room_min[None, None, :] - origin) / dirs_world
        t_hi = (spec.room_max[None, None, :] - origin) / dirs_world
        t_far = np.maximum(t_lo, t_hi)
        t_far[~np.isfinite(t_far)] = np.inf
    t_exit = t_far.min(axis=-1)
    return np.minimum(t_exit, MAX_DEPTH_M).astype(np.float64)


def render_frame(spec: SceneSpec, frame: int) -> FrameBundle:
    """Render one frame, independent of all other frames."""
    rng = np.random.default_rng([spec.seed, frame])
    intr = spec.intrinsics

    position = spec.camera_position(frame)
    target = spec.camera_target(frame)
    rotation = look_at_rotation(position, target) @ _jitter_rotation(
        rng, spec.camera.angular_jitter
    )
    pose = CameraPose(rotation=rotation, translation=position, timestamp=frame)

    # Instance geometry in this frame.
    states = []
    for inst in spec.instances:
        center, motion = inst.position_and_motion(frame)
        p_cam = pose.world_to_camera(center)
        z = float(p_cam[2])
        u = intr.fx * p_cam[0] / z + intr.cx if z > 1e-6 else np.nan
        v = intr.fy * p_cam[1] / z + intr.cy if z > 1e-6 else np.nan
        in_view = (
            z > 1e-6
            and _VISIBILITY_MARGIN_PX <= u < intr.width - _VISIBILITY_MARGIN_PX
            and _VISIBILITY_MARGIN_PX <= v < intr.height - _VISIBILITY_MARGIN_PX
        )
        states.append({"inst": inst, "center": center, "motion": motion,
                       "z": z, "u": u, "v": v, "in_view": in_view})

    if spec.occlusion:
        for s in states:
            if not s["in_view"]:
                continue
            for other in states:
                if other is s or not other["in_view"] or other["z"] >= s["z"]:
                    continue
                ru = intr.fx * other["inst"].radius / other["z"]
                rv = intr.fy * other["inst"].radius / other["z"]
                du = (s["u"] - other["u"]) / ru
                dv = (s["v"] - other["v"]) / rv
                if du * du + dv * dv <= 1.0:
                    s["in_view"] = False
                    break

    # Depth: room walls, then instance discs (nearest wins).
    depth = _wall_depth(spec, pose)
    for s in states:
        if not s["in_view"]:
            continue
        ru = intr.fx * s["inst"].radius / s["z"]
        rv = intr.fy * s["inst"].radius / s["z"]
        c0 = max(0, int(math.floor(s["u"] - ru)))
        c1 = min(intr.width - 1, int(math.ceil(s["u"] + ru)))
        r0 = max(0, int(math.floor(s["v"] - rv)))
        r1 = min(intr.height - 1, int(math.ceil(s["v"] + rv)))
        cols = np.arange(c0, c1 + 1)
        rows = np.arange(r0, r1 + 1)
        du = (cols[None, :] - s["u"]) / ru
        dv = (rows[:, None] - s["v"]) / rv
        disc = du * du + dv * dv <= 1.0
        region = depth[r0 : r1 + 1, c0 : c1 + 1]
        region[disc] = np.minimum(region[disc], s["z"])

    # Ground truth and inlier proposals. The proposal box keeps the
    # unclipped disc bounds so its center is exactly the projected
    # instance center; the annotated gt box is clipped into the image.
    proposals = []
    gt = {}
    for s in states:
        inst = s["inst"]
        visible = s["in_view"] and not (spec.hide_in_transit and s["motion"] == DYNAMIC)
        gt_bbox = None
        prop_bbox = None
        if visible:
            ru = intr.fx * inst.radius / s["z"]
            rv = intr.fy * inst.radius / s["z"]
            prop_bbox = (s["u"] - ru, s["v"] - rv, s["u"] + ru, s["v"] + rv)
            gt_bbox = (
                max(0.0, prop_bbox[0]),
                max(0.0, prop_bbox[1]),
                min(float(intr.width), prop_bbox[2]),
                min(float(intr.height), prop_bbox[3]),
            )
            if not (gt_bbox[0] < gt_bbox[2] and gt_bbox[1] < gt_bbox[3]):
                visible, gt_bbox, prop_bbox = False, None, None
        gt[inst.instance_id] = InstanceGT(
            visible=visible, bbox=gt_bbox, center_world=s["center"].copy(), motion=s["motion"]
        )
        if visible:
            emb = inst.embedding
            if spec.embedding_noise > 0:
                noisy = emb + rng.normal(0.0, spec.embedding_noise, emb.shape[0])
                emb = noisy / np.linalg.norm(noisy)
            else:
                rng.normal(0.0, 1.0, emb.shape[0])  # keep the stream aligned
            proposals.append(
                Proposal(bbox=prop_bbox, score=float(rng.uniform(0.75, 0.95)), embedding=emb)
            )

    proposals.extend(_distractor_proposals(spec, rng))

    # Sensor noise on the depth map. Dropout probability uses the true
    # range, with a knee for far returns.
    true_depth = depth.copy()
    if spec.depth_noise > 0:
        depth = depth + rng.normal(0.0, spec.depth_noise, depth.shape)
    else:
        rng.normal(0.0, 1.0, depth.shape)
    depth = np.clip(depth, 1e-2, MAX_DEPTH_M)
    drop_prob = np.full(depth.shape, spec.depth_dropout)
    if spec.far_distance > 0:
        drop_prob = np.where(true_depth > spec.far_distance, spec.far_dropout, drop_prob)
    drop = rng.random(depth.shape) < drop_prob
    depth = np.where(drop, np.nan, depth)

    order = rng.permutation(len(proposals))
    proposals = [proposals[i] for i in order]
    return FrameBundle(
        frame=frame,
        pose=pose,
        depth=DepthMap(values=depth.astype(np.float32)),
        proposals=proposals,
        gt=gt,
    )


def _distractor_proposals(spec: SceneSpec, rng) -> list:
    intr = spec.intrinsics
    out = []
    for _ in range(spec.distractor_count):
        vec = rng.standard_normal(spec.embedding_dim)
        out.append(
            Proposal(
                bbox=_random_bbox(intr, rng),
                score=float(rng.uniform(0.3, 0.9)),
                embedding=vec / np.linalg.norm(vec),
            )
        )
    for k in range(spec.confusable_count):
        base = spec.instances[k % len(spec.instances)].embedding
        vec = base + rng.normal(0.0, spec.confusable_noise, spec.embedding_dim)
        out.append(
            Proposal(
                bbox=_random_bbox(intr, rng),
                score=float(rng.uniform(0.5, 0.9)),
                embedding=vec / np.linalg.norm(vec),
            )
        )
    return out


def _random_bbox(intr: CameraIntrinsics, rng) -> tuple:
    w = float(rng.uniform(8.0, 0.25 * intr.width))
    h = float(rng.uniform(8.0, 0.25 * intr.height))
    cx = float(rng.uniform(0.3 * w, intr.width - 0.3 * w))
    cy = float(rng.uniform(0.3 * h, intr.height - 0.3 * h))
    x0 = max(0.0, cx - 0.5 * w)
    y0 = max(0.0, cy - 0.5 * h)
    x1 = min(float(intr.width), cx + 0.5 * w)
    y1 = min(float(intr.height), cy + 0.5 * h)
    return (x0, y0, max(x1, x0 + 1.0), max(y1, y0 + 1.0))


def generate_scene(spec: SceneSpec) -> list[FrameBundle]:
    """All frames of a scene, deterministic in spec.seed."""
    return [render_frame(spec, f) for f in range(spec.num_frames)]


def mvpe_views(spec: SceneSpec, instance_index: int, count: int | None = None) -> list:
    """Noisy enrollment views of one instance (multi-view photos stand
    in as perturbed copies of the true embedding)."""
    inst = spec.instances[instance_index]
    n = spec.mvpe_view_count if count is None else count
    rng = np.random.default_rng([spec.seed, 555_000 + instance_index])
    views = []
    for _ in range(n):
        vec = inst.embedding + rng.normal(0.0, spec.mvpe_view_noise, spec.embedding_dim)
        views.append(vec / np.linalg.norm(vec))
    return views


def svoe_enrollment_frame(frames, instance_id: str) -> tuple[int, tuple] | None:
    """First frame whose gt box reaches the recommended enrollment
    area, else the largest visible box; None if never visible."""
    best = None
    for bundle in frames:
        g = bundle.gt.get(instance_id)
        if g is None or not g.visible or g.bbox is None:
            continue
        area = (g.bbox[2] - g.bbox[0]) * (g.bbox[3] - g.bbox[1])
        if area >= _SVOE_MIN_AREA:
            return bundle.frame, g.bbox
        if best is None or area > best[2]:
            best = (bundle.frame, g.bbox, area)
    if best is None:
        return None
    return best[0], best[1]


def export_dataset(frames, spec: SceneSpec, out_dir) -> dict:
    """Write a scene to disk in the standard dataset layout; returns the
    manifest. Reading the files back reproduces the in-memory values
    at format precision."""
    from . import dataio
    from .evaluation import GroundTruthInstance

    layout = dataio.DatasetLayout(out_dir)
    layout.root.mkdir(parents=True, exist_ok=True)
    files = []

    dataio.write_intrinsics(layout.intrinsics_file, spec.intrinsics)
    files.append("intrinsics.txt")

    dataio.write_poses(layout.poses_file, [b.pose for b in frames])
    files.append("poses.txt")

    layout.depth_dir.mkdir(parents=True, exist_ok=True)
    for b in frames:
        dataio.write_depth(layout.depth_file(b.frame), b.depth)
        files.append(f"depth/frame_{b.frame:06d}.depth")

    proposals_by_frame = {b.frame: b.proposals for b in frames if b.proposals}
    if proposals_by_frame:
        dataio.write_proposals(layout.proposals_file, proposals_by_frame)
    else:
        # Valid empty file: header only.
        dataio.atomic_write_text(
            layout.proposals_file, f"# proposals\ndim {spec.embedding_dim}\n"
        )
    files.append("proposals.txt")

    instances = []
    for inst in spec.instances:
        boxes = {}
        visibility = {}
        for b in frames:
            if b.frame % spec.annotation_stride != 0:
                continue
            g = b.gt[inst.instance_id]
            if g.visible and g.bbox is not None:
                boxes[b.frame] = g.bbox
                visibility[b.frame] = True
        intervals = [(p.start, p.end, p.position) for p in inst.placements]
        instances.append(
            GroundTruthInstance(
                instance_id=inst.instance_id,
                stationary_intervals=intervals,
                boxes_2d=boxes,
                visibility=visibility,
            )
        )
    annotations = dataio.AnnotationSet(
        instances=instances,
        num_frames=spec.num_frames,
        image_size=(spec.intrinsics.width, spec.intrinsics.height),
    )
    dataio.write_annotations(layout.annotations_file, annotations)
    files.append("annotations.txt")

    svoe_records = []
    for inst in spec.instances:
        picked = svoe_enrollment_frame(frames, inst.instance_id)
        if picked is not None:
            svoe_records.append(
                dataio.SvoeRecord(instance_id=inst.instance_id, frame=picked[0], bbox=picked[1])
            )
    dataio.write_enrollment_svoe(layout.svoe_file, svoe_records)
    files.append("enrollment_svoe.txt")

    mvpe = dataio.MvpeEnrollment(dim=spec.embedding_dim)
    for k, inst in enumerate(spec.instances):
        mvpe.views[inst.instance_id] = mvpe_views(spec, k)
    dataio.write_enrollment_mvpe(layout.mvpe_file, mvpe)
    files.append("enrollment_mvpe.txt")

    dataio.atomic_write_text(layout.spec_file, spec.to_json() + "\n")
    files.append("scene_spec.json")

    return dataio.write_manifest(layout.root, files)


# ---------------------------------------------------------------------------
# Presets used by the command line, demos, and the acceptance suite.


def _base_spec(seed: int, **overrides) -> SceneSpec:
    intr = CameraIntrinsics(fx=140.0, fy=140.0, cx=72.0, cy=54.0, width=144, height=108)
    defaults = dict(
        seed=seed,
        num_frames=120,
        room_min=[0.0, 0.0, 0.0],
        room_max=[6.0, 5.0, 3.0],
        intrinsics=intr,
        camera=CameraPathSpec(
            waypoints=[[3.0, 1.0, 1.6], [3.4, 1.2, 1.5]],
            look_at=[[3.0, 3.0, 0.9]],
            angular_jitter=0.004,
        ),
        instances=[
            InstanceSpec(
                instance_id="mug",
                radius=0.2,
                placements=[Placement(0, 119, [2.6, 3.0, 0.9])],
            ),
            InstanceSpec(
                instance_id="stapler",
                radius=0.19,
                placements=[Placement(0, 119, [3.4, 3.1, 0.85])],
            ),
        ],
    )
    defaults.update(overrides)
    return SceneSpec(**defaults)


def perfect_info_spec(seed: int = 0) -> SceneSpec:
    """Noise-free scene: the tracker must reproduce ground truth."""
    return _base_spec(seed, distractor_count=2)


def default_spec(seed: int = 0) -> SceneSpec:
    return _base_spec(
        seed,
        embedding_noise=0.05,
        depth_noise=0.02,
        depth_dropout=0.05,
        distractor_count=3,
    )


def noisy_depth_spec(seed: int = 0, num_frames: int = 60) -> SceneSpec:
    """Single static instance under 5 cm depth noise, for filter-vs-raw
    comparisons."""
    return _base_spec(
        seed,
        num_frames=num_frames,
        depth_noise=0.05,
        instances=[
            InstanceSpec(
                instance_id="mug",
                radius=0.18,
                placements=[Placement(0, num_frames - 1, [3.0, 3.0, 0.9])],
            )
        ],
    )


def relocation_spec(seed: int = 0, displacement: float = 1.0) -> SceneSpec:
    """One scripted relocation at mid-sequence; the object is carried
    (hidden) in transit, so reacquisition is a clean jump."""
    return _base_spec(
        seed,
        num_frames=120,
        hide_in_transit=True,
        instances=[
            InstanceSpec(
                instance_id="mug",
                radius=0.18,
                placements=[
                    Placement(0, 49, [3.0 - 0.5 * displacement, 3.0, 0.9]),
                    Placement(60, 119, [3.0 + 0.5 * displacement, 3.0, 0.9]),
                ],
            )
        ],
    )


def distractor_heavy_spec(seed: int = 0) -> SceneSpec:
    """Look-alike clutter plus a short-range depth sensor.

    Confusable boxes land anywhere in the image, usually on walls
    beyond the sensor's working range where depth returns are almost
    all missing, while the enrolled object sits well inside it. So
    appearance alone picks the wrong box regularly, but wrong matches
    rarely produce a valid 3-D lift and the world-frame memory stays
    anchored on the object."""
    return _base_spec(
        seed,
        num_frames=150,
        embedding_noise=0.10,
        confusable_count=3,
        confusable_noise=0.14,
        distractor_count=2,
        far_distance=3.0,
        far_dropout=0.999,
        instances=[
            InstanceSpec(
                instance_id="mug",
                radius=0.18,
                placements=[Placement(0, 149, [3.0, 3.0, 0.9])],
            )
        ],
    )


def out_of_view_spec(seed: int = 0) -> SceneSpec:
    """The camera pans away mid-sequence while look-alike clutter keeps
    arriving: exercises memory carries and bad-update rejection."""
    return _base_spec(
        seed,
        num_frames=120,
        embedding_noise=0.08,
        confusable_count=2,
        confusable_noise=0.20,
        camera=CameraPathSpec(
            waypoints=[[3.0, 0.8, 1.6]],
            look_at=[[3.0, 3.0, 0.9], [0.3, 0.5, 1.4], [3.0, 3.0, 0.9]],
            angular_jitter=0.004,
        ),
        instances=[
            InstanceSpec(
                instance_id="mug",
                radius=0.18,
                placements=[Placement(0, 119, [3.0, 3.0, 0.9])],
            )
        ],
    )


PRESETS = {
    "default": default_spec,
    "perfect-info": perfect_info_spec,
    "noisy-depth": noisy_depth_spec,
    "relocation": relocation_spec,
    "distractor-heavy": distractor_heavy_spec,
    "out-of-view": out_of_view_spec,
}
