"""Pinhole camera math.

Conventions used throughout the toolkit:

World frame
    Right-handed, z-up, meters. Fixed for a whole recording.

Camera frame
    Standard computer vision axes: x right, y down, z forward along
    the optical axis. A :class:`CameraPose` is the world-from-camera
    transform, i.e. ``p_world = R @ p_cam + t``.

Image frame
    u right, v down, pixels, origin at the top-left corner.

Back-projection of a pixel (u, v) with depth z:

    p_cam = [ (u - cx) * z / fx,  (v - cy) * z / fy,  z ]
    p_world = R @ p_cam + t
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BehindCameraError,
    DegenerateRayError,
    InvalidDepthError,
    OutOfBoundsError,
)

# Depth sensors targeted here are indoor, short-range devices.
MAX_DEPTH_M = 20.0

# Camera-frame z below this counts as "behind the camera".
MIN_CAMERA_Z = 1e-6


@dataclass
class CameraIntrinsics:
    """Pinhole intrinsics (no distortion model)."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive, got fx={self.fx} fy={self.fy}")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError(
                f"principal point ({self.cx}, {self.cy}) outside {self.width}x{self.height} image"
            )

    @property
    def matrix(self) -> np.ndarray:
        """3x3 intrinsic matrix."""
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]],
            dtype=np.float64,
        )

    def contains(self, u: float, v: float) -> bool:
        """True if the (continuous) pixel lies inside the image."""
        return 0 <= u < self.width and 0 <= v < self.height


@dataclass
class CameraPose:
    """World-from-camera rigid transform at one frame."""

    rotation: np.ndarray
    translation: np.ndarray
    timestamp: int = 0

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        self.translation = np.asarray(self.translation, dtype=np.float64).reshape(3)
        err = np.abs(self.rotation.T @ self.rotation - np.eye(3)).max()
        if err > 1e-6:
            raise ValueError(f"rotation is not orthonormal (max deviation {err:.3g})")
        det = np.linalg.det(self.rotation)
        if abs(det - 1.0) > 1e-6:
            raise ValueError(f"rotation determinant {det:.9f} != 1 (improper rotation)")

    def camera_to_world(self, p_cam: np.ndarray) -> np.ndarray:
        return self.rotation @ np.asarray(p_cam, dtype=np.float64) + self.translation

    def world_to_camera(self, p_world: np.ndarray) -> np.ndarray:
        return self.rotation.T @ (np.asarray(p_world, dtype=np.float64) - self.translation)

    @property
    def center(self) -> np.ndarray:
        """Camera optical center in world coordinates."""
        return self.translation


@dataclass
class DepthMap:
    """Per-pixel range in meters; NaN or non-positive marks missing."""

    values: np.ndarray
    _valid: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)
        if self.values.ndim != 2:
            raise ValueError(f"depth map must be 2-D, got shape {self.values.shape}")
        self._valid = np.isfinite(self.values) & (self.values > 0)
        if self._valid.any() and float(self.values[self._valid].max()) > MAX_DEPTH_M:
            raise ValueError(
                f"valid depth exceeds {MAX_DEPTH_M} m: {self.values[self._valid].max():.3f}"
            )

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def is_valid(self, row: int, col: int) -> bool:
        return bool(self._valid[row, col])


def lift_to_world(
    pixel, depth: float, intr: CameraIntrinsics, pose: CameraPose
) -> np.ndarray:
    """Back-project a pixel with known depth to a 3-D world point.

    Raises InvalidDepthError for non-positive depth and OutOfBoundsError
    for pixels outside the image.
    """
    u, v = float(pixel[0]), float(pixel[1])
    if not np.isfinite(depth) or depth <= 0:
        raise InvalidDepthError(f"depth must be positive, got {depth}")
    if not intr.contains(u, v):
        raise OutOfBoundsError(
            f"pixel ({u}, {v}) outside {intr.width}x{intr.height} image"
        )
    p_cam = np.array(
        [(u - intr.cx) * depth / intr.fx, (v - intr.cy) * depth / intr.fy, depth],
        dtype=np.float64,
    )
    return pose.camera_to_world(p_cam)


def project_to_pixel(
    point, intr: CameraIntrinsics, pose: CameraPose
) -> tuple[np.ndarray, float]:
    """Project a world point into the image; returns ((u, v), camera z).

    Raises BehindCameraError when the point is at or behind the optical
    center. The returned pixel may fall outside the image bounds.
    """
    p_cam = pose.world_to_camera(point)
    z = float(p_cam[2])
    if z <= MIN_CAMERA_Z:
        raise BehindCameraError(f"camera-frame z = {z:.3g} is not in front of the camera")
    u = intr.fx * p_cam[0] / z + intr.cx
    v = intr.fy * p_cam[1] / z + intr.cy
    return np.array([u, v], dtype=np.float64), z


def sample_depth(depth_map: DepthMap, pixel, radius: int = 2) -> float | None:
    """Depth at a pixel: nearest-pixel value, else median of the valid
    values in the (2*radius+1)^2 window, else None.

    Absence of depth is a value, not an error; callers downgrade to a
    memory-carry.
    """
    u, v = float(pixel[0]), float(pixel[1])
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    col = int(round(u))
    row = int(round(v))
    if not (0 <= col < depth_map.width and 0 <= row < depth_map.height):
        raise OutOfBoundsError(
            f"pixel ({u}, {v}) outside {depth_map.width}x{depth_map.height} depth map"
        )
    if depth_map.is_valid(row, col):
        return float(depth_map.values[row, col])
    if radius == 0:
        return None
    r0 = max(0, row - radius)
    r1 = min(depth_map.height, row + radius + 1)
    c0 = max(0, col - radius)
    c1 = min(depth_map.width, col + radius + 1)
    window = depth_map.values[r0:r1, c0:c1]
    valid = window[np.isfinite(window) & (window > 0)]
    if valid.size == 0:
        return None
    return float(np.median(valid))


def angular_error(gt_world, pred_world, pose: CameraPose) -> float:
    """Angle in radians between the camera-center rays to two world
    points, measured in the camera frame of the given pose. Result in
    [0, pi].
    """
    d_gt = pose.world_to_camera(gt_world)
    d_pred = pose.world_to_camera(pred_world)
    n_gt = np.linalg.norm(d_gt)
    n_pred = np.linalg.norm(d_pred)
    if n_gt <= 1e-6 or n_pred <= 1e-6:
        raise DegenerateRayError("point coincides with the camera center")
    cos = float(np.dot(d_gt, d_pred) / (n_gt * n_pred))
    return math.acos(min(1.0, max(-1.0, cos)))


def quaternion_to_rotation(qx: float, qy: float, qz: float, qw: float) -> np.ndarray:
    """Unit quaternion (x, y, z, w) to a 3x3 rotation matrix."""
    n = math.sqrt(qx * qx + qy * qy + qz * qz + qw * qw)
    if n == 0:
        raise ValueError("zero quaternion has no orientation")
    x, y, z, w = qx / n, qy / n, qz / n, qw / n
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ],
        dtype=np.float64,
    )


def rotation_to_quaternion(rotation: np.ndarray) -> tuple[float, float, float, float]:
    """Rotation matrix to unit quaternion (x, y, z, w), w >= 0."""
    m = np.asarray(rotation, dtype=np.float64)
    trace = m[0, 0] + m[1, 1] + m[2, 2]
    if trace > 0:
        s = math.sqrt(trace + 1.0) * 2
        w = 0.25 * s
        x = (m[2, 1] - m[1, 2]) / s
        y = (m[0, 2] - m[2, 0]) / s
        z = (m[1, 0] - m[0, 1]) / s
    elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
        s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2
        w = (m[2, 1] - m[1, 2]) / s
        x = 0.25 * s
        y = (m[0, 1] + m[1, 0]) / s
        z = (m[0, 2] + m[2, 0]) / s
    elif m[1, 1] > m[2, 2]:
        s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2
        w = (m[0, 2] - m[2, 0]) / s
        x = (m[0, 1] + m[1, 0]) / s
        y = 0.25 * s
        z = (m[1, 2] + m[2, 1]) / s
    else:
        s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2
        w = (m[1, 0] - m[0, 1]) / s
        x = (m[0, 2] + m[2, 0]) / s
        y = (m[1, 2] + m[2, 1]) / s
        z = 0.25 * s
    if w < 0:
        x, y, z, w = -x, -y, -z, -w
    n = math.sqrt(x * x + y * y + z * z + w * w)
    return x / n, y / n, z / n, w / n


def look_at_rotation(position, target, up=(0.0, 0.0, 1.0)) -> np.ndarray:
    """World-from-camera rotation for a camera at `position` looking at
    `target`, with camera x right, y down, z forward and the given world
    up direction.
    """
    position = np.asarray(position, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    up = np.asarray(up, dtype=np.float64)
    forward = target - position
    n = np.linalg.norm(forward)
    if n < 1e-9:
        raise ValueError("camera position and look-at target coincide")
    forward = forward / n
    down = -up + np.dot(up, forward) * forward
    n = np.linalg.norm(down)
    if n < 1e-9:
        # Looking straight up/down the world up axis: any horizontal down works.
        down = np.array([1.0, 0.0, 0.0]) if abs(forward[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        down = down - np.dot(down, forward) * forward
        n = np.linalg.norm(down)
    down = down / n
    right = np.cross(down, forward)
    return np.column_stack([right, down, forward])
