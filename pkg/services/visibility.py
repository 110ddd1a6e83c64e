"""
Visibility
==========
Модель камеры (прямоугольная пирамида видимости) и множества видимых
точек конструкции для поз и траекторий.

Камера смотрит вдоль оси x корпуса, y — влево, z — вверх.
Границы по глубине и углам включительные.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from geometry.core import PointCloud
from geometry.trajectory import Pose, Trajectory
from utils.errors import EmptyInputError, InvalidParameterError

logger = logging.getLogger(__name__)

# допуск на границе угла (рад)
_ANGLE_EPS = 1e-12

# ограничение на число отсчётов луча в одном пакете
_RAY_BATCH = 2_000_000


@dataclass(frozen=True)
class CameraModel:
    """Полные углы обзора (градусы), безопасная и максимальная дальность (м)"""
    fov_horizontal: float = 75.0
    fov_vertical: float = 75.0
    safety_distance: float = 2.0
    max_view_distance: float = 50.0

    def __post_init__(self):
        for name in ("fov_horizontal", "fov_vertical"):
            value = getattr(self, name)
            if not 0 < value <= 180:
                raise InvalidParameterError(f"{name} must be in (0, 180], got {value}")
        if not 0 <= self.safety_distance < self.max_view_distance:
            raise InvalidParameterError(
                f"Need 0 <= safety_distance < max_view_distance, got "
                f"{self.safety_distance} / {self.max_view_distance}"
            )

    @property
    def half_horizontal(self) -> float:
        return math.radians(self.fov_horizontal) / 2.0

    @property
    def half_vertical(self) -> float:
        return math.radians(self.fov_vertical) / 2.0

    def to_dict(self) -> dict:
        return {
            "fov_h_deg": self.fov_horizontal,
            "fov_v_deg": self.fov_vertical,
            "safety_m": self.safety_distance,
            "max_range_m": self.max_view_distance,
        }


@dataclass(frozen=True, eq=False)
class VisibilitySet:
    """Отсортированные уникальные индексы точек облака"""
    indices: np.ndarray

    def __post_init__(self):
        arr = np.unique(np.asarray(self.indices, dtype=np.int64).reshape(-1))
        arr.setflags(write=False)
        object.__setattr__(self, "indices", arr)

    @classmethod
    def empty(cls) -> "VisibilitySet":
        return cls(np.zeros(0, dtype=np.int64))

    @classmethod
    def union_all(cls, sets: Iterable["VisibilitySet"]) -> "VisibilitySet":
        arrays = [s.indices for s in sets]
        if not arrays:
            return cls.empty()
        return cls(np.concatenate(arrays))

    def __len__(self) -> int:
        return self.indices.size

    def __iter__(self):
        return iter(self.indices.tolist())

    def __contains__(self, index) -> bool:
        pos = np.searchsorted(self.indices, index)
        return bool(pos < self.indices.size and self.indices[pos] == index)

    def __eq__(self, other) -> bool:
        if not isinstance(other, VisibilitySet):
            return NotImplemented
        return np.array_equal(self.indices, other.indices)

    __hash__ = None

    def is_empty(self) -> bool:
        return self.indices.size == 0

    def union(self, other: "VisibilitySet") -> "VisibilitySet":
        return VisibilitySet(np.union1d(self.indices, other.indices))

    def intersection_size(self, other: "VisibilitySet") -> int:
        return int(np.intersect1d(self.indices, other.indices, assume_unique=True).size)

    def issubset(self, other: "VisibilitySet") -> bool:
        return bool(np.all(np.isin(self.indices, other.indices)))

    def to_list(self) -> list[int]:
        return self.indices.tolist()


class OccupancyGrid:
    """
    Воксельная сетка занятости для проверки перекрытия луча.
    Ячейка занята, если в неё попадает хотя бы одна точка конструкции.
    """

    def __init__(self, structure: PointCloud, cell_size: float):
        if structure.is_empty():
            raise EmptyInputError("Occupancy grid needs a non-empty structure")
        if not cell_size > 0:
            raise InvalidParameterError(f"cell_size must be positive, got {cell_size}")
        self.cell_size = float(cell_size)
        self.origin = structure.points.min(axis=0)
        keys = self._keys(structure.points)
        self.shape = keys.max(axis=0) + 1
        self._occupied = np.unique(self._linear(keys))

    def _keys(self, points: np.ndarray) -> np.ndarray:
        return np.floor((points - self.origin) / self.cell_size).astype(np.int64)

    def _linear(self, keys: np.ndarray) -> np.ndarray:
        return (keys[..., 0] * self.shape[1] + keys[..., 1]) * self.shape[2] + keys[..., 2]

    def occupied(self, points: np.ndarray) -> np.ndarray:
        """Маска занятости для массива точек (..., 3)"""
        keys = self._keys(points)
        inside = np.all((keys >= 0) & (keys < self.shape), axis=-1)
        linear = self._linear(np.where(inside[..., None], keys, 0))
        return inside & np.isin(linear, self._occupied)

    def unobstructed(self, origin: np.ndarray, targets: np.ndarray) -> np.ndarray:
        """
        Маска точек, к которым луч из origin не проходит через занятые ячейки.
        Отсчёты берутся с шагом cell/2 и обрываются за 2 ячейки до точки.
        """
        if targets.shape[0] == 0:
            return np.zeros(0, dtype=bool)
        step = self.cell_size / 2.0
        offsets = targets - origin
        dist = np.linalg.norm(offsets, axis=1)
        reach = dist - 2.0 * self.cell_size
        samples = max(1, int(np.ceil(reach.max() / step))) if reach.max() > 0 else 0
        result = np.ones(targets.shape[0], dtype=bool)
        if samples == 0:
            return result

        ts = step * np.arange(1, samples + 1)
        directions = offsets / np.maximum(dist, 1e-12)[:, None]
        batch = max(1, _RAY_BATCH // samples)
        for start in range(0, targets.shape[0], batch):
            sl = slice(start, start + batch)
            points = origin + directions[sl, None, :] * ts[None, :, None]
            hits = self.occupied(points) & (ts[None, :] < reach[sl, None])
            result[sl] = ~hits.any(axis=1)
        return result


def visible_points(
    pose: Pose,
    camera: CameraModel,
    structure: PointCloud,
    occlusion: bool = False,
    occupancy: Optional[OccupancyGrid] = None,
) -> VisibilitySet:
    """
    Точки конструкции внутри пирамиды видимости позы: глубина в
    [safety, max_range], углы от визирной оси в пределах ±fov/2 по обеим осям.
    """
    if structure.is_empty():
        raise EmptyInputError("Structure cloud is empty")

    cam = (structure.points - pose.position) @ pose.rotation_matrix()
    depth = cam[:, 0]
    mask = (depth >= camera.safety_distance) & (depth <= camera.max_view_distance)
    horizontal = np.abs(np.arctan2(cam[:, 1], depth))
    vertical = np.abs(np.arctan2(cam[:, 2], depth))
    mask &= horizontal <= camera.half_horizontal + _ANGLE_EPS
    mask &= vertical <= camera.half_vertical + _ANGLE_EPS
    candidates = np.flatnonzero(mask)

    if occlusion and candidates.size:
        if occupancy is None:
            raise InvalidParameterError("Occlusion test needs an occupancy grid")
        clear = occupancy.unobstructed(pose.position, structure.points[candidates])
        candidates = candidates[clear]

    return VisibilitySet(candidates)


def trajectory_visibility(
    trajectory: Trajectory,
    camera: CameraModel,
    structure: PointCloud,
    occlusion: bool = False,
    occupancy: Optional[OccupancyGrid] = None,
) -> tuple[list[VisibilitySet], VisibilitySet]:
    """Множества видимости по позам и их объединение V"""
    trajectory.require_nonempty()
    per_pose = [visible_points(pose, camera, structure, occlusion, occupancy) for pose in trajectory]
    total = VisibilitySet.union_all(per_pose)
    logger.info(f"Видимость траектории '{trajectory.label}': {len(trajectory)} поз, "
                f"{len(total)} из {len(structure)} точек")
    return per_pose, total
