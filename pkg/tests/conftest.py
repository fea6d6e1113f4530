import numpy as np
import pytest

from ego3dtrack.geometry import CameraIntrinsics, CameraPose, quaternion_to_rotation


def make_intrinsics(fx=500.0, fy=500.0, cx=320.0, cy=240.0, width=640, height=480):
    return CameraIntrinsics(fx=fx, fy=fy, cx=cx, cy=cy, width=width, height=height)


def identity_pose(timestamp=0):
    return CameraPose(rotation=np.eye(3), translation=np.zeros(3), timestamp=timestamp)


def random_pose(rng, timestamp=0, translation_scale=3.0):
    """Uniform random rotation (via a normalized quaternion) plus a
    bounded translation."""
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    rotation = quaternion_to_rotation(*q)
    translation = rng.uniform(-translation_scale, translation_scale, 3)
    return CameraPose(rotation=rotation, translation=translation, timestamp=timestamp)


def random_unit(rng, dim):
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)
