"""Per-instance tracking by detection.

The pipeline per frame: match appearance proposals against an enrolled
template by cosine similarity, take the matched box center, sample
depth, lift to a 3-D world point, then either store it directly or feed
it to a constant-velocity Kalman filter. Frames with no confident
detection re-emit the most recent confident location (memory size 1).

A relocation of the tracked object shows up as a large innovation; the
filter is then reset at the new measurement instead of smoothing
through the jump (piecewise constant velocity).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTemplateError, DimensionMismatchError, GeometryError
from .geometry import CameraIntrinsics, CameraPose, DepthMap, lift_to_world, sample_depth

SVOE = "SVOE"
MVPE = "MVPE"

PROVENANCE_FRESH = "fresh-detection"
PROVENANCE_CARRY = "memory-carry"
PROVENANCE_KALMAN = "kalman-smoothed"
PROVENANCES = (PROVENANCE_FRESH, PROVENANCE_CARRY, PROVENANCE_KALMAN)

_UNIT_NORM_TOL = 1e-5


def _check_unit(embedding: np.ndarray, what: str) -> np.ndarray:
    embedding = np.asarray(embedding, dtype=np.float64).reshape(-1)
    norm = float(np.linalg.norm(embedding))
    if abs(norm - 1.0) > _UNIT_NORM_TOL:
        raise ValueError(f"{what} embedding must be unit length, got norm {norm:.6f}")
    return embedding


@dataclass
class Proposal:
    """Candidate detection: box, confidence, unit appearance embedding."""

    bbox: tuple[float, float, float, float]
    score: float
    embedding: np.ndarray

    def __post_init__(self):
        x0, y0, x1, y1 = (float(v) for v in self.bbox)
        if not (x0 < x1 and y0 < y1):
            raise ValueError(f"degenerate bbox {self.bbox}")
        self.bbox = (x0, y0, x1, y1)
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must be in [0, 1], got {self.score}")
        self.embedding = _check_unit(self.embedding, "proposal")

    @property
    def center(self) -> tuple[float, float]:
        x0, y0, x1, y1 = self.bbox
        return (0.5 * (x0 + x1), 0.5 * (y0 + y1))


@dataclass
class Template:
    """Enrolled instance appearance: one view or an averaged set."""

    embedding: np.ndarray
    source: str
    view_count: int = 1

    def __post_init__(self):
        if self.source not in (SVOE, MVPE):
            raise ValueError(f"source must be {SVOE} or {MVPE}, got {self.source!r}")
        if self.view_count < 1:
            raise ValueError("view_count must be >= 1")
        if self.source == SVOE and self.view_count != 1:
            raise ValueError("single-view enrollment implies view_count == 1")
        self.embedding = _check_unit(self.embedding, "template")

    @property
    def dim(self) -> int:
        return self.embedding.shape[0]


def make_template(embeddings, source: str) -> Template:
    """Average enrollment embeddings and re-normalize to unit length."""
    views = [np.asarray(e, dtype=np.float64).reshape(-1) for e in embeddings]
    if not views:
        raise ValueError("cannot build a template from zero views")
    dim = views[0].shape[0]
    for v in views:
        if v.shape[0] != dim:
            raise DimensionMismatchError(
                f"view embeddings disagree on dimension: {v.shape[0]} vs {dim}"
            )
    if source == SVOE and len(views) != 1:
        raise ValueError(f"single-view enrollment expects exactly 1 view, got {len(views)}")
    mean = np.mean(views, axis=0)
    norm = float(np.linalg.norm(mean))
    if norm < 1e-12:
        raise DegenerateTemplateError("mean of view embeddings is the zero vector")
    return Template(embedding=mean / norm, source=source, view_count=len(views))


def match_proposals(
    proposals, template: Template, cosine_threshold: float
) -> tuple[Proposal, float] | None:
    """Best-cosine proposal, or None when every similarity is below the
    threshold (object treated as not visible this frame).

    Ties on similarity break by higher score, then lower x_min, then
    lower y_min, so identical inputs always select the same proposal.
    """
    best = None
    best_key = None
    for prop in proposals:
        if prop.embedding.shape[0] != template.dim:
            raise DimensionMismatchError(
                f"proposal dim {prop.embedding.shape[0]} != template dim {template.dim}"
            )
        sim = float(np.dot(prop.embedding, template.embedding))
        key = (sim, prop.score, -prop.bbox[0], -prop.bbox[1])
        if best_key is None or key > best_key:
            best, best_key = (prop, sim), key
    if best is None or best[1] < cosine_threshold:
        return None
    return best


# ---------------------------------------------------------------------------
# Constant-velocity Kalman filter (state = position + velocity, dt = 1 frame)

_F = np.block([[np.eye(3), np.eye(3)], [np.zeros((3, 3)), np.eye(3)]])
_H = np.hstack([np.eye(3), np.zeros((3, 3))])


@dataclass
class KalmanState:
    """6-D state (position m, velocity m/frame) with its covariance and
    the noise models it was configured with."""

    x_hat: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        self.x_hat = np.asarray(self.x_hat, dtype=np.float64).reshape(6)
        self.P = np.asarray(self.P, dtype=np.float64).reshape(6, 6)
        self.Q = np.asarray(self.Q, dtype=np.float64).reshape(6, 6)
        self.R = np.asarray(self.R, dtype=np.float64).reshape(3, 3)

    @property
    def H(self) -> np.ndarray:
        """Observation matrix selecting the position block."""
        return _H.copy()

    @property
    def position(self) -> np.ndarray:
        return self.x_hat[:3].copy()

    @property
    def velocity(self) -> np.ndarray:
        return self.x_hat[3:].copy()


def kalman_init(position, Q: np.ndarray, R: np.ndarray, P0: np.ndarray) -> KalmanState:
    """Fresh filter at a measured position with zero velocity."""
    x = np.zeros(6)
    x[:3] = np.asarray(position, dtype=np.float64).reshape(3)
    return KalmanState(x_hat=x, P=P0.copy(), Q=Q, R=R)


def kalman_predict(state: KalmanState) -> KalmanState:
    """One constant-velocity step: position += velocity, P grows by Q."""
    x = _F @ state.x_hat
    P = _F @ state.P @ _F.T + state.Q
    return KalmanState(x_hat=x, P=P, Q=state.Q, R=state.R)


def kalman_update(state: KalmanState, z) -> KalmanState:
    """Standard measurement update with a 3-D position observation."""
    z = np.asarray(z, dtype=np.float64).reshape(3)
    if not np.all(np.isfinite(z)):
        raise ValueError(f"measurement must be finite, got {z}")
    S = _H @ state.P @ _H.T + state.R
    try:
        K = state.P @ _H.T @ np.linalg.inv(S)
    except np.linalg.LinAlgError as exc:
        raise ValueError("innovation covariance is singular") from exc
    x = state.x_hat + K @ (z - _H @ state.x_hat)
    P = (np.eye(6) - K @ _H) @ state.P
    return KalmanState(x_hat=x, P=P, Q=state.Q, R=state.R)


def kalman_step_with_reset(
    state: KalmanState, z, reset_threshold: float, initial_covariance: np.ndarray
) -> tuple[KalmanState, bool]:
    """Predict, then either update or reset.

    A measurement farther than `reset_threshold` from the predicted
    position is read as a relocation: the filter restarts at the
    measurement with zero velocity and covariance `initial_covariance`.
    """
    z = np.asarray(z, dtype=np.float64).reshape(3)
    predicted = kalman_predict(state)
    innovation = float(np.linalg.norm(z - predicted.position))
    if innovation > reset_threshold:
        return kalman_init(z, Q=state.Q, R=state.R, P0=initial_covariance), True
    return kalman_update(predicted, z), False


# ---------------------------------------------------------------------------
# Tracker configuration and per-instance state


@dataclass
class TrackerConfig:
    """Knobs for matching, lifting, and smoothing.

    Noise defaults assume ~5 cm measurement noise so that the 0.15 m
    reset threshold sits well above steady-state innovations.
    """

    cosine_threshold: float = 0.6
    reset_threshold: float = 0.15
    use_kalman: bool = False
    depth_window_radius: int = 2
    visible_only_update: bool = False
    q_position: float = 1e-4
    q_velocity: float = 1e-4
    r_measurement: float = 2.5e-3
    p0_position: float = 1e-2
    p0_velocity: float = 1e-2

    def __post_init__(self):
        if not -1.0 <= self.cosine_threshold <= 1.0:
            raise ValueError(f"cosine_threshold must be in [-1, 1], got {self.cosine_threshold}")
        if self.reset_threshold <= 0:
            raise ValueError(f"reset_threshold must be positive, got {self.reset_threshold}")
        if self.depth_window_radius < 0:
            raise ValueError("depth_window_radius must be >= 0")

    def process_noise(self) -> np.ndarray:
        return np.diag([self.q_position] * 3 + [self.q_velocity] * 3)

    def measurement_noise(self) -> np.ndarray:
        return np.diag([self.r_measurement] * 3)

    def initial_covariance(self) -> np.ndarray:
        return np.diag([self.p0_position] * 3 + [self.p0_velocity] * 3)

    def new_kalman(self, position) -> KalmanState:
        return kalman_init(
            position,
            Q=self.process_noise(),
            R=self.measurement_noise(),
            P0=self.initial_covariance(),
        )


@dataclass
class TrackState:
    """Mutable per-instance tracker state (single writer)."""

    memory: np.ndarray | None = None
    kalman: KalmanState | None = None
    last_update_frame: int | None = None


@dataclass
class TrajectoryEntry:
    point: np.ndarray
    provenance: str

    def __post_init__(self):
        self.point = np.asarray(self.point, dtype=np.float64).reshape(3)
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")


class Trajectory:
    """Per-frame world locations for one instance, keyed by strictly
    increasing frame index."""

    def __init__(self):
        self._entries: dict[int, TrajectoryEntry] = {}
        self._last_frame: int | None = None

    def add(self, frame: int, point, provenance: str) -> None:
        if self._last_frame is not None and frame <= self._last_frame:
            raise ValueError(
                f"frame {frame} not after previous frame {self._last_frame}"
            )
        self._entries[int(frame)] = TrajectoryEntry(point, provenance)
        self._last_frame = int(frame)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, frame: int) -> bool:
        return frame in self._entries

    def frames(self) -> list[int]:
        return sorted(self._entries)

    def entry(self, frame: int) -> TrajectoryEntry | None:
        return self._entries.get(frame)

    def point_at(self, frame: int) -> np.ndarray | None:
        e = self._entries.get(frame)
        return None if e is None else e.point

    def items(self):
        for frame in sorted(self._entries):
            yield frame, self._entries[frame]


def track_instance(
    frames,
    template: Template,
    intr: CameraIntrinsics,
    cfg: TrackerConfig,
    visible_frames=None,
    reset_log: list | None = None,
) -> Trajectory:
    """Run the full per-frame loop for one enrolled instance.

    Args:
        frames: iterable of (proposals, DepthMap, CameraPose); the pose
            timestamp is the frame index and must be strictly increasing.
        visible_frames: optional set of frame indices on which fresh
            detections may update the memory. Required when
            cfg.visible_only_update is set (oracle visibility mode);
            frames outside the set can only re-emit the memory.
        reset_log: optional list collecting the frame index of every
            Kalman reset (filter initialization does not count).

    Geometry failures (missing/invalid depth, box center out of bounds)
    are not errors here; the frame degrades to a memory-carry.
    """
    if cfg.visible_only_update and visible_frames is None:
        raise ValueError("visible_only_update requires visible_frames")
    state = TrackState()
    trajectory = Trajectory()
    for proposals, depth_map, pose in frames:
        frame = int(pose.timestamp)
        point = None
        provenance = None
        match = match_proposals(proposals, template, cfg.cosine_threshold)
        if match is not None and cfg.visible_only_update and frame not in visible_frames:
            match = None
        if match is not None:
            measurement = _lift_match(match[0], depth_map, intr, pose, cfg)
            if measurement is not None:
                if cfg.use_kalman:
                    if state.kalman is None:
                        state.kalman = cfg.new_kalman(measurement)
                    else:
                        state.kalman, did_reset = kalman_step_with_reset(
                            state.kalman,
                            measurement,
                            cfg.reset_threshold,
                            cfg.initial_covariance(),
                        )
                        if did_reset and reset_log is not None:
                            reset_log.append(frame)
                    point = state.kalman.position
                    provenance = PROVENANCE_KALMAN
                else:
                    point = measurement
                    provenance = PROVENANCE_FRESH
                state.memory = point
                state.last_update_frame = frame
        if point is None and state.memory is not None:
            point = state.memory
            provenance = PROVENANCE_CARRY
        if point is not None:
            trajectory.add(frame, point, provenance)
    return trajectory


def _lift_match(
    proposal: Proposal,
    depth_map: DepthMap,
    intr: CameraIntrinsics,
    pose: CameraPose,
    cfg: TrackerConfig,
) -> np.ndarray | None:
    center = proposal.center
    if not intr.contains(center[0], center[1]):
        return None
    try:
        depth = sample_depth(depth_map, center, cfg.depth_window_radius)
        if depth is None:
            return None
        return lift_to_world(center, depth, intr, pose)
    except GeometryError:
        return None


def guided_2d_select(
    proposals, projected, template: Template, cosine_threshold: float
) -> tuple[float, float, float, float] | None:
    """2-D box selection steered by the 3-D trajectory: among proposals
    passing the cosine threshold, pick the box whose center is nearest
    the projected 3-D point. Pixel distance beats similarity."""
    pu, pv = float(projected[0]), float(projected[1])
    best_bbox = None
    best_key = None
    for prop in proposals:
        if prop.embedding.shape[0] != template.dim:
            raise DimensionMismatchError(
                f"proposal dim {prop.embedding.shape[0]} != template dim {template.dim}"
            )
        sim = float(np.dot(prop.embedding, template.embedding))
        if sim < cosine_threshold:
            continue
        cu, cv = prop.center
        dist = float(np.hypot(cu - pu, cv - pv))
        key = (dist, -prop.score, prop.bbox[0], prop.bbox[1])
        if best_key is None or key < best_key:
            best_bbox, best_key = prop.bbox, key
    return best_bbox
