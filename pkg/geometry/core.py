"""
Geometry Core
=============
Облака точек, воксельный фильтр, индекс ближайших соседей,
габаритные рамки, покоординатная статистика и жёсткие преобразования.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from utils.errors import (
    DegenerateGeometryError,
    EmptyInputError,
    InsufficientDataError,
    InvalidParameterError,
)

logger = logging.getLogger(__name__)

# Нижняя граница СКО по оси (плоские конструкции вроде палубы)
STD_FLOOR = 1e-6

# Относительный допуск при сравнении расстояний до соседей
_TIE_TOLERANCE = 1e-12


def _as_points(points) -> np.ndarray:
    """Приводит вход к массиву (n, 3) float64"""
    arr = np.array(points, dtype=np.float64)
    if arr.size == 0:
        return np.zeros((0, 3))
    if arr.ndim == 1 and arr.size == 3:
        arr = arr.reshape(1, 3)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise InvalidParameterError(f"Expected (n, 3) points, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class PointCloud:
    """
    Упорядоченный набор точек поверхности.
    Индекс точки — её позиция в массиве, на него ссылаются
    множества видимости и карта соответствий.
    """
    points: np.ndarray
    label: str = ""

    def __post_init__(self):
        arr = _as_points(self.points)
        if not np.all(np.isfinite(arr)):
            raise InvalidParameterError(f"Point cloud '{self.label}' contains NaN/Inf")
        arr.setflags(write=False)
        object.__setattr__(self, "points", arr)

    def __len__(self) -> int:
        return self.points.shape[0]

    def is_empty(self) -> bool:
        return len(self) == 0

    def transformed(self, transform: "RigidTransform") -> "PointCloud":
        return PointCloud(transform.apply(self.points), self.label)

    def centroid(self) -> np.ndarray:
        _require_nonempty(self)
        return self.points.mean(axis=0)


@dataclass(frozen=True)
class Aabb:
    """Габаритная рамка, выровненная по осям"""
    min_corner: np.ndarray
    max_corner: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.min_corner, dtype=np.float64).reshape(3)
        hi = np.asarray(self.max_corner, dtype=np.float64).reshape(3)
        if np.any(lo > hi):
            raise InvalidParameterError(f"Aabb min {lo} exceeds max {hi}")
        object.__setattr__(self, "min_corner", lo)
        object.__setattr__(self, "max_corner", hi)

    @property
    def extent(self) -> np.ndarray:
        return self.max_corner - self.min_corner

    @property
    def center(self) -> np.ndarray:
        return (self.min_corner + self.max_corner) / 2.0

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(self.extent))

    def floored_extent(self, floor: float = STD_FLOOR) -> np.ndarray:
        """Габариты с заменой вырожденных осей на floor"""
        return np.maximum(self.extent, floor)


@dataclass(frozen=True)
class AxisStats:
    """Покоординатное среднее и СКО облака (генеральная совокупность)"""
    mean: np.ndarray
    std_dev: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64).reshape(3)
        std = np.asarray(self.std_dev, dtype=np.float64).reshape(3)
        if np.any(std <= 0) or not np.all(np.isfinite(std)) or not np.all(np.isfinite(mean)):
            raise InvalidParameterError(f"Invalid axis stats: mean={mean}, std={std}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std_dev", std)

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std_dev": self.std_dev.tolist()}


@dataclass(frozen=True)
class RigidTransform:
    """Жёсткое преобразование x -> R x + t"""
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        rot = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        trans = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if not np.allclose(rot.T @ rot, np.eye(3), atol=1e-9, rtol=0.0):
            raise InvalidParameterError("Rotation matrix is not orthonormal")
        if abs(np.linalg.det(rot) - 1.0) > 1e-9:
            raise InvalidParameterError("Rotation matrix has det != +1")
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", trans)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls()

    def apply(self, points) -> np.ndarray:
        pts = _as_points(points)
        return pts @ self.rotation.T + self.translation

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """self ∘ other: сначала other, затем self"""
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "RigidTransform":
        rot_t = self.rotation.T
        return RigidTransform(rot_t, -rot_t @ self.translation)

    def as_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m


class NnIndex:
    """
    Индекс ближайших соседей поверх облака (k-d дерево).
    При равенстве расстояний возвращается меньший индекс.
    """

    def __init__(self, cloud: PointCloud):
        _require_nonempty(cloud)
        self.cloud = cloud
        self._tree = cKDTree(cloud.points)

    def __len__(self) -> int:
        return len(self.cloud)

    def nearest(self, query) -> tuple[int, float]:
        """Ближайшая точка облака к query: (индекс, расстояние)"""
        indices, distances = self.nearest_many(np.asarray(query, dtype=np.float64).reshape(1, 3))
        return int(indices[0]), float(distances[0])

    def nearest_many(self, queries) -> tuple[np.ndarray, np.ndarray]:
        """Пакетный поиск: индексы (m,) и евклидовы расстояния (m,)"""
        q = _as_points(queries)
        n = len(self.cloud)
        if q.shape[0] == 0:
            return np.zeros(0, dtype=np.int64), np.zeros(0)

        k = min(n, 4)
        dist, idx = self._tree.query(q, k=k)
        dist = dist.reshape(q.shape[0], k)
        idx = idx.reshape(q.shape[0], k).astype(np.int64)

        limit = dist[:, :1] * (1.0 + _TIE_TOLERANCE) + _TIE_TOLERANCE
        tied = dist <= limit
        best = np.where(tied, idx, np.iinfo(np.int64).max).min(axis=1)

        # все k кандидатов равноудалены: добираем остальных шаром
        saturated = np.flatnonzero(tied.all(axis=1)) if k < n else np.zeros(0, dtype=np.int64)
        for row in saturated:
            members = self._tree.query_ball_point(q[row], r=float(limit[row, 0]))
            best[row] = min(members) if members else best[row]

        exact = np.linalg.norm(self.cloud.points[best] - q, axis=1)
        return best, exact


def _require_nonempty(cloud: PointCloud):
    if cloud is None or len(cloud) == 0:
        raise EmptyInputError("Point cloud is empty")


def voxel_downsample(cloud: PointCloud, voxel_size: float) -> PointCloud:
    """
    Воксельный фильтр: по одной точке (центроиду) на занятый воксель.

    Сетка привязана к минимальному углу габаритной рамки облака,
    порядок выходных точек — лексикографический по индексу вокселя.
    """
    _require_nonempty(cloud)
    if not voxel_size > 0 or not np.isfinite(voxel_size):
        raise InvalidParameterError(f"voxel_size must be positive, got {voxel_size}")

    pts = cloud.points
    origin = pts.min(axis=0)
    keys = np.floor((pts - origin) / voxel_size).astype(np.int64)
    _, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)

    sums = np.zeros((counts.size, 3))
    np.add.at(sums, inverse, pts)
    centroids = sums / counts[:, None]

    logger.debug(f"Voxel filter {voxel_size:.4g} m: {len(cloud)} -> {counts.size} points")
    return PointCloud(centroids, cloud.label)


def compute_aabb(cloud: PointCloud) -> Aabb:
    """Покоординатные минимум и максимум"""
    _require_nonempty(cloud)
    return Aabb(cloud.points.min(axis=0), cloud.points.max(axis=0))


def axis_stats(cloud: PointCloud, floor: float = STD_FLOOR) -> AxisStats:
    """Среднее и СКО (генеральная совокупность) по каждой оси"""
    if cloud is None or len(cloud) < 2:
        raise InsufficientDataError("axis_stats needs at least 2 points")
    mean = cloud.points.mean(axis=0)
    std = cloud.points.std(axis=0)
    return AxisStats(mean, np.maximum(std, floor))


def standardize(points, stats: AxisStats) -> np.ndarray:
    """z-оценка: (p - mean) / std по каждой оси"""
    return (_as_points(points) - stats.mean) / stats.std_dev


def destandardize(points, stats: AxisStats) -> np.ndarray:
    """Обратное преобразование: z * std + mean"""
    return _as_points(points) * stats.std_dev + stats.mean


def default_voxel_size(cloud: PointCloud, divisor: float = 50.0) -> float:
    """Размер вокселя по умолчанию: диагональ рамки / divisor"""
    diagonal = compute_aabb(cloud).diagonal
    if diagonal <= 0:
        raise DegenerateGeometryError("Cloud has zero bounding-box diagonal")
    return diagonal / divisor


def sampling_spacing(cloud: PointCloud, neighbours: int = 4) -> float:
    """
    Шаг дискретизации облака: среднеквадратичное по точкам расстояние
    до самого дальнего из `neighbours` ближайших соседей.

    На регулярной сетке с шагом s даёт s, на сетке a × b при b ≤ a ≤ 2b даёт a.
    """
    _require_nonempty(cloud)
    if neighbours < 1:
        raise InvalidParameterError(f"neighbours must be >= 1, got {neighbours}")
    k = min(neighbours, len(cloud) - 1)
    if k == 0:
        return 0.0
    dist, _ = cKDTree(cloud.points).query(cloud.points, k=k + 1)
    farthest = np.asarray(dist).reshape(len(cloud), k + 1)[:, -1]
    return float(np.sqrt(np.mean(farthest ** 2)))
