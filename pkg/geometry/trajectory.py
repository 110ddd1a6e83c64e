"""
Poses & Trajectories
====================
Поза камеры (позиция + кватернион) и траектория с метками времени.

Система координат корпуса: ось x — визирная ось камеры,
y — влево, z — вверх. Кватернионы хранятся в порядке (w, x, y, z),
как в CSV-файлах траекторий.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from scipy.spatial.transform import Rotation, Slerp

from geometry.core import NnIndex, PointCloud
from utils.errors import EmptyInputError, InvalidParameterError

logger = logging.getLogger(__name__)

FORWARD_AXIS = np.array([1.0, 0.0, 0.0])


def _to_wxyz(rotation: Rotation) -> np.ndarray:
    x, y, z, w = rotation.as_quat()
    quat = np.array([w, x, y, z])
    # канонический знак: w >= 0
    return quat if w >= 0 else -quat


def _xyzw_to_wxyz(quats: np.ndarray) -> np.ndarray:
    wxyz = np.asarray(quats, dtype=np.float64).reshape(-1, 4)[:, [3, 0, 1, 2]]
    return np.where(wxyz[:, :1] < 0, -wxyz, wxyz)


def _from_wxyz(quat: np.ndarray) -> Rotation:
    w, x, y, z = quat
    return Rotation.from_quat([x, y, z, w])


def orientation_from_forward(forward) -> np.ndarray:
    """Кватернион (w, x, y, z) с визирной осью вдоль forward и нулевым креном"""
    f = np.asarray(forward, dtype=np.float64).reshape(3)
    norm = np.linalg.norm(f)
    if norm < 1e-12:
        raise InvalidParameterError("Forward direction has zero length")
    f = f / norm
    yaw = np.arctan2(f[1], f[0])
    pitch = -np.arcsin(np.clip(f[2], -1.0, 1.0))
    return _to_wxyz(Rotation.from_euler("ZYX", [yaw, pitch, 0.0]))


def aim_at_structure(positions, structure: PointCloud) -> np.ndarray:
    """Кватернионы (n, 4), направляющие камеру на ближайшую точку конструкции"""
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
    nearest, _ = NnIndex(structure).nearest_many(positions)
    return np.array([
        orientation_from_forward(structure.points[j] - p) for p, j in zip(positions, nearest)
    ]).reshape(-1, 4)


@dataclass(frozen=True, eq=False)
class Pose:
    """Поза: позиция (м) и единичный кватернион (w, x, y, z)"""
    position: np.ndarray
    orientation: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))

    def __post_init__(self):
        pos = np.array(self.position, dtype=np.float64).reshape(3)
        quat = np.array(self.orientation, dtype=np.float64).reshape(4)
        norm = np.linalg.norm(quat)
        if not np.all(np.isfinite(pos)) or not np.isfinite(norm) or norm < 1e-12:
            raise InvalidParameterError(f"Invalid pose: position={pos}, orientation={quat}")
        quat = quat / norm
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "orientation", quat)

    @classmethod
    def looking_at(cls, position, target) -> "Pose":
        """Поза в position, смотрящая на точку target"""
        position = np.asarray(position, dtype=np.float64)
        return cls(position, orientation_from_forward(np.asarray(target, dtype=np.float64) - position))

    def rotation(self) -> Rotation:
        return _from_wxyz(self.orientation)

    def rotation_matrix(self) -> np.ndarray:
        return self.rotation().as_matrix()

    def forward(self) -> np.ndarray:
        return self.rotation_matrix() @ FORWARD_AXIS

    def with_position(self, position) -> "Pose":
        return Pose(position, self.orientation)

    def to_dict(self) -> dict:
        return {"position": self.position.tolist(), "orientation": self.orientation.tolist()}


@dataclass(eq=False)
class Trajectory:
    """
    Последовательность поз с метками времени.
    times — секунды, неубывающие; positions — (n, 3); orientations — (n, 4) wxyz.
    """
    times: np.ndarray
    positions: np.ndarray
    orientations: np.ndarray
    label: str = ""
    orientation_fallback: bool = False

    def __post_init__(self):
        self.times = np.array(self.times, dtype=np.float64).reshape(-1)
        self.positions = np.array(self.positions, dtype=np.float64).reshape(-1, 3)
        self.orientations = np.array(self.orientations, dtype=np.float64).reshape(-1, 4)
        n = self.times.size
        if self.positions.shape[0] != n or self.orientations.shape[0] != n:
            raise InvalidParameterError(
                f"Trajectory arrays disagree: {n} times, {self.positions.shape[0]} positions, "
                f"{self.orientations.shape[0]} orientations"
            )
        if not (np.all(np.isfinite(self.times)) and np.all(np.isfinite(self.positions))
                and np.all(np.isfinite(self.orientations))):
            raise InvalidParameterError("Trajectory contains NaN/Inf")
        if n > 1 and np.any(np.diff(self.times) < 0):
            raise InvalidParameterError("Trajectory timestamps must be non-decreasing")
        norms = np.linalg.norm(self.orientations, axis=1)
        if np.any(norms < 1e-12):
            raise InvalidParameterError("Trajectory contains a zero quaternion")
        self.orientations = self.orientations / norms[:, None]

    @classmethod
    def from_poses(cls, poses: list[Pose], times=None, label: str = "") -> "Trajectory":
        if times is None:
            times = np.arange(len(poses), dtype=np.float64)
        return cls(
            times=np.asarray(times, dtype=np.float64),
            positions=np.array([p.position for p in poses]).reshape(-1, 3),
            orientations=np.array([p.orientation for p in poses]).reshape(-1, 4),
            label=label,
        )

    def __len__(self) -> int:
        return self.times.size

    def __iter__(self) -> Iterator[Pose]:
        return (self.pose(i) for i in range(len(self)))

    def pose(self, index: int) -> Pose:
        return Pose(self.positions[index], self.orientations[index])

    def require_nonempty(self):
        if len(self) == 0:
            raise EmptyInputError(f"Trajectory '{self.label}' is empty")

    def cumulative_length(self) -> np.ndarray:
        """Длина пути от начала до каждой точки (м)"""
        if len(self) == 0:
            return np.zeros(0)
        steps = np.linalg.norm(np.diff(self.positions, axis=0), axis=1)
        return np.concatenate([[0.0], np.cumsum(steps)])

    def path_length(self) -> float:
        lengths = self.cumulative_length()
        return float(lengths[-1]) if lengths.size else 0.0

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0]) if len(self) else 0.0

    def average_speed(self) -> float:
        duration = self.duration
        return self.path_length() / duration if duration > 0 else 0.0

    def with_positions(self, positions) -> "Trajectory":
        """Та же траектория с новыми позициями (время и ориентации без изменений)"""
        return Trajectory(self.times.copy(), positions, self.orientations.copy(),
                          self.label, self.orientation_fallback)

    def densified(self, step: float) -> "Trajectory":
        """
        Уплотнение: на каждом участке добавляются позы с шагом step (м),
        позиции — линейная интерполяция, ориентации — slerp.
        """
        if step <= 0:
            raise InvalidParameterError(f"Densify step must be positive, got {step}")
        if len(self) < 2:
            return self

        times, positions, orientations = [], [], []
        rotations = Rotation.from_quat(self.orientations[:, [1, 2, 3, 0]])
        for i in range(len(self) - 1):
            length = float(np.linalg.norm(self.positions[i + 1] - self.positions[i]))
            count = max(1, int(np.ceil(length / step)))
            fractions = np.arange(count) / count
            slerp = Slerp([0.0, 1.0], rotations[i:i + 2])
            times.append(self.times[i] + fractions * (self.times[i + 1] - self.times[i]))
            positions.append(self.positions[i] + fractions[:, None] * (self.positions[i + 1] - self.positions[i]))
            orientations.append(_xyzw_to_wxyz(slerp(fractions).as_quat()))
        times.append(self.times[-1:])
        positions.append(self.positions[-1:])
        orientations.append(self.orientations[-1:])

        return Trajectory(
            np.concatenate(times), np.vstack(positions), np.vstack(orientations),
            self.label, self.orientation_fallback,
        )
