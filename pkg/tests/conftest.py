"""
Общие фикстуры тестов: настольные сцены (куб, камеры) и построители поз.
"""

import numpy as np
import pytest

from config import PlannerSettings
from geometry.core import PointCloud
from geometry.trajectory import Pose, Trajectory
from services.scenes import StructureKind, StructureSpec, synth_structure
from services.visibility import CameraModel


def cube_cloud(side: float = 2.0, spacing: float = 0.1) -> PointCloud:
    """Куб на плоскости z = 0, центрированный по x и y"""
    return synth_structure(StructureSpec(StructureKind.BOX, (side,), spacing))


def constant_speed_times(positions, speed: float = 1.0) -> np.ndarray:
    positions = np.asarray(positions, dtype=np.float64)
    steps = np.linalg.norm(np.diff(positions, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(steps)]) / speed


def face_trajectory(half: float = 1.0, center_z: float = 1.0, standoff: float = 0.5,
                    lateral=(0.0,), speed: float = 1.0) -> Trajectory:
    """
    Облёт граней куба против часовой стрелки: −x, −y, +x, +y.
    На каждую грань — по позе на каждое смещение из lateral, камера смотрит по нормали внутрь.
    """
    d = half + standoff
    faces = [
        (lambda s: (-d, -s, center_z), (1.0, 0.0, 0.0)),
        (lambda s: (s, -d, center_z), (0.0, 1.0, 0.0)),
        (lambda s: (d, s, center_z), (-1.0, 0.0, 0.0)),
        (lambda s: (-s, d, center_z), (0.0, -1.0, 0.0)),
    ]
    poses = []
    for place, forward in faces:
        for s in lateral:
            position = np.array(place(s))
            poses.append(Pose.looking_at(position, position + np.array(forward)))
    positions = np.array([p.position for p in poses])
    return Trajectory.from_poses(poses, constant_speed_times(positions, speed), label="faces")


@pytest.fixture
def cube() -> PointCloud:
    return cube_cloud()


@pytest.fixture
def patch_camera() -> CameraModel:
    """Узкая камера: с удаления 0.5 м видит только пятно 7×7 точек своей грани"""
    return CameraModel(fov_horizontal=70.0, fov_vertical=70.0, safety_distance=0.2, max_view_distance=1.0)


@pytest.fixture
def patch_settings() -> PlannerSettings:
    return PlannerSettings(fov_h_deg=70.0, fov_v_deg=70.0, safety_m=0.2, max_range_m=1.0, lambda_=0.05)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
