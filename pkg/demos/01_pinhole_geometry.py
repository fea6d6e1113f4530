"""Pinhole camera basics: lifting pixels to 3-D and back.

A pixel plus a depth value plus a camera pose pins down a unique world
point. This script walks through the math on a hand-sized example and
shows the two failure modes the toolkit reports (bad depth, point
behind the camera).
"""

import numpy as np

from ego3dtrack import (
    BehindCameraError,
    CameraIntrinsics,
    CameraPose,
    DepthMap,
    InvalidDepthError,
    angular_error,
    lift_to_world,
    project_to_pixel,
    sample_depth,
)

# A 640x480 camera with 500 px focal length, sitting 1 m along world x,
# looking straight down the world z axis.
intr = CameraIntrinsics(fx=500.0, fy=500.0, cx=320.0, cy=240.0, width=640, height=480)
pose = CameraPose(rotation=np.eye(3), translation=[1.0, 0.0, 0.0], timestamp=0)

print("Lift a detection at pixel (420, 240) seen 2 m away:")
world = lift_to_world((420.0, 240.0), 2.0, intr, pose)
print("  -> world point", world)  # (1.4, 0, 2): 0.4 m right of the camera, 2 m ahead

print("Project it back:")
pixel, depth = project_to_pixel(world, intr, pose)
print(f"  -> pixel {pixel}, camera depth {depth:.3f} m (round trip is exact)")

# Depth maps mark missing values with NaN or non-positive numbers.
# sample_depth tries the exact pixel first, then a small median window.
values = np.full((480, 640), np.nan, dtype=np.float32)
values[238:243, 418:423] = 2.0
values[240, 420] = np.nan  # hole exactly at the detection center
depth_map = DepthMap(values=values)
print("Depth at a center with a hole, radius-2 median fallback:",
      sample_depth(depth_map, (420.0, 240.0), radius=2), "m")
print("Depth in a fully missing region:",
      sample_depth(depth_map, (50.0, 50.0), radius=2))

# Angular error compares the rays from the camera center to two world
# points; it is the localization metric that ignores range error.
gt = np.array([1.0, 0.0, 2.0])
pred_same_ray = np.array([1.0, 0.0, 3.5])  # farther along the same ray
pred_off_ray = np.array([1.4, 0.0, 2.0])
print(f"Angular error, range-only mistake: "
      f"{angular_error(gt, pred_same_ray, pose):.4f} rad")
print(f"Angular error, 0.4 m lateral mistake at 2 m: "
      f"{angular_error(gt, pred_off_ray, pose):.4f} rad")

print("Failure modes are typed errors:")
try:
    lift_to_world((420.0, 240.0), 0.0, intr, pose)
except InvalidDepthError as exc:
    print("  InvalidDepthError:", exc)
try:
    project_to_pixel([1.0, 0.0, -5.0], intr, pose)
except BehindCameraError as exc:
    print("  BehindCameraError:", exc)
