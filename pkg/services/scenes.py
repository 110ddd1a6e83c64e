"""
Synthetic Scenes
================
Детерминированные синтетические конструкции (куб/кубоид, цилиндр, мост,
корпус) и демонстрационные траектории (облёт, «U», «8», спираль).

Конструкции стоят на плоскости z = 0 и центрированы по x и y.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from geometry.core import PointCloud, compute_aabb
from geometry.trajectory import Trajectory, aim_at_structure
from utils.errors import EmptyInputError, InvalidParameterError

logger = logging.getLogger(__name__)


class StructureKind(str, Enum):
    BOX = "box"
    CUBOID = "cuboid"
    CYLINDER = "cylinder"
    BRIDGE = "bridge"
    HULL = "hull"


class TrajectoryPattern(str, Enum):
    ORBIT = "orbit"
    U_PATH = "u_path"
    FIGURE_EIGHT = "figure_eight"
    SPIRAL = "spiral"


# число размеров для каждого вида конструкции
_DIMENSION_NAMES = {
    StructureKind.BOX: ("side_x", "side_y", "side_z"),
    StructureKind.CUBOID: ("side_x", "side_y", "side_z"),
    StructureKind.CYLINDER: ("radius", "height"),
    StructureKind.BRIDGE: ("length", "width", "height"),
    StructureKind.HULL: ("length", "beam", "depth"),
}


@dataclass(frozen=True)
class StructureSpec:
    """
    Описание синтетической конструкции.
    Для box допускается один размер (куб), jitter — СКО шума точек (м).
    """
    kind: StructureKind
    dimensions: tuple[float, ...]
    sample_spacing: float
    seed: int = 0
    jitter: float = 0.0

    def __post_init__(self):
        kind = StructureKind(self.kind)
        dims = tuple(float(d) for d in self.dimensions)
        if kind in (StructureKind.BOX, StructureKind.CUBOID) and len(dims) == 1:
            dims = dims * 3
        expected = _DIMENSION_NAMES[kind]
        if len(dims) != len(expected):
            raise InvalidParameterError(f"{kind.value} needs dimensions {expected}, got {dims}")
        if any(not d > 0 for d in dims):
            raise InvalidParameterError(f"Dimensions must be positive, got {dims}")
        if not self.sample_spacing > 0:
            raise InvalidParameterError(f"Spacing must be positive, got {self.sample_spacing}")
        if self.sample_spacing > min(dims):
            raise InvalidParameterError(
                f"Spacing {self.sample_spacing} exceeds the smallest dimension {min(dims)}"
            )
        if self.jitter < 0:
            raise InvalidParameterError(f"Jitter must be non-negative, got {self.jitter}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "dimensions", dims)


def _axis_samples(low: float, high: float, spacing: float) -> np.ndarray:
    count = max(2, int(round((high - low) / spacing)) + 1)
    return np.linspace(low, high, count)


def box_surface(min_corner, max_corner, spacing: float) -> np.ndarray:
    """Точки шести граней прямоугольного параллелепипеда на регулярной сетке"""
    axes = [_axis_samples(lo, hi, spacing) for lo, hi in zip(min_corner, max_corner)]
    sizes = [a.size for a in axes]
    faces = []
    for axis in range(3):
        others = [a for a in range(3) if a != axis]
        grid = np.stack(np.meshgrid(np.arange(sizes[others[0]]), np.arange(sizes[others[1]]),
                                    indexing="ij"), axis=-1).reshape(-1, 2)
        for side in (0, sizes[axis] - 1):
            keys = np.empty((grid.shape[0], 3), dtype=np.int64)
            keys[:, axis] = side
            keys[:, others[0]] = grid[:, 0]
            keys[:, others[1]] = grid[:, 1]
            faces.append(keys)
    keys = np.unique(np.vstack(faces), axis=0)
    return np.column_stack([axes[a][keys[:, a]] for a in range(3)])


def _cylinder_surface(radius: float, height: float, spacing: float) -> np.ndarray:
    heights = _axis_samples(0.0, height, spacing)
    count = max(3, int(math.ceil(2 * math.pi * radius / spacing)))
    angles = 2 * math.pi * np.arange(count) / count
    ring = np.column_stack([radius * np.cos(angles), radius * np.sin(angles)])
    return np.vstack([np.column_stack([ring, np.full(count, z)]) for z in heights])


def _bridge_surface(length: float, width: float, height: float, spacing: float) -> np.ndarray:
    deck = max(spacing, height / 10.0)
    pier = max(spacing, length / 10.0)
    parts = [box_surface([-length / 2, -width / 2, height - deck], [length / 2, width / 2, height], spacing)]
    for center in (-length / 4, length / 4):
        parts.append(box_surface([center - pier / 2, -width / 4, 0.0],
                                 [center + pier / 2, width / 4, height - deck], spacing))
    return np.unique(np.vstack(parts), axis=0)


def _hull_surface(length: float, beam: float, depth: float, spacing: float) -> np.ndarray:
    """Полуэллиптические шпангоуты, сужающиеся к носу и корме, плюс палуба"""
    stations = _axis_samples(-length / 2, length / 2, spacing)
    parts = []
    for x in stations:
        u = 2 * x / length
        half_beam = beam / 2 * math.sqrt(1.0 - 0.8 * u * u)
        perimeter = math.pi * math.sqrt((half_beam ** 2 + depth ** 2) / 2)
        count = max(3, int(math.ceil(perimeter / spacing)) + 1)
        theta = np.linspace(0.0, math.pi, count)
        section = np.column_stack([
            np.full(count, x),
            half_beam * np.cos(theta),
            depth * (1.0 - np.sin(theta)),
        ])
        across = _axis_samples(-half_beam, half_beam, spacing)
        deck = np.column_stack([np.full(across.size, x), across, np.full(across.size, depth)])
        parts.extend([section, deck])
    return np.unique(np.vstack(parts), axis=0)


def synth_structure(spec: StructureSpec) -> PointCloud:
    """Облако точек поверхности; одинаковые spec и seed дают идентичный результат"""
    dims = spec.dimensions
    if spec.kind in (StructureKind.BOX, StructureKind.CUBOID):
        sx, sy, sz = dims
        points = box_surface([-sx / 2, -sy / 2, 0.0], [sx / 2, sy / 2, sz], spec.sample_spacing)
    elif spec.kind is StructureKind.CYLINDER:
        points = _cylinder_surface(*dims, spec.sample_spacing)
    elif spec.kind is StructureKind.BRIDGE:
        points = _bridge_surface(*dims, spec.sample_spacing)
    else:
        points = _hull_surface(*dims, spec.sample_spacing)

    if spec.jitter > 0:
        rng = np.random.default_rng(spec.seed)
        points = points + rng.normal(0.0, spec.jitter, points.shape)

    label = f"{spec.kind.value}_{'x'.join(f'{d:g}' for d in dims)}"
    logger.info(f"Синтетическая конструкция {label}: {points.shape[0]} точек")
    return PointCloud(points, label)


# ==================== ТРАЕКТОРИИ ====================

def _uniform_on_polyline(vertices: np.ndarray, count: int) -> np.ndarray:
    """count точек, равномерно распределённых по длине ломаной (с концами)"""
    steps = np.linalg.norm(np.diff(vertices, axis=0), axis=1)
    cumulative = np.concatenate([[0.0], np.cumsum(steps)])
    if count == 1:
        return vertices[:1].copy()
    targets = np.linspace(0.0, cumulative[-1], count)
    return np.column_stack([np.interp(targets, cumulative, vertices[:, a]) for a in range(3)])


def synth_demo_trajectory(
    pattern: TrajectoryPattern,
    structure: PointCloud,
    standoff: float,
    points: int,
    speed: float = 1.0,
    turns: float = 2.0,
) -> Trajectory:
    """
    Демонстрация вокруг конструкции на удалении standoff; камера смотрит
    на ближайшую точку конструкции, время — при постоянной скорости speed.

    orbit: окружность радиуса (полудиагональ рамки в плоскости xy + standoff)
    на средней высоте; u_path: левая сторона от середины вниз, нижняя сторона,
    правая сторона обратно к середине; figure_eight: «восьмёрка» в вертикальной
    плоскости перед гранью min x; spiral: turns витков снизу вверх.
    """
    pattern = TrajectoryPattern(pattern)
    if structure.is_empty():
        raise EmptyInputError("Cannot build a trajectory around an empty structure")
    if not standoff > 0:
        raise InvalidParameterError(f"Standoff must be positive, got {standoff}")
    if points < 1:
        raise InvalidParameterError(f"Need at least one trajectory point, got {points}")
    if not speed > 0:
        raise InvalidParameterError(f"Speed must be positive, got {speed}")

    box = compute_aabb(structure)
    center, extent = box.center, box.extent

    if pattern in (TrajectoryPattern.ORBIT, TrajectoryPattern.SPIRAL):
        radius = math.hypot(extent[0], extent[1]) / 2 + standoff
        if pattern is TrajectoryPattern.ORBIT:
            angles = 2 * math.pi * np.arange(points) / points
            heights = np.full(points, center[2])
        else:
            fractions = np.arange(points) / max(points - 1, 1)
            angles = 2 * math.pi * turns * fractions
            heights = box.min_corner[2] + extent[2] * fractions
        positions = np.column_stack([
            center[0] + radius * np.cos(angles),
            center[1] + radius * np.sin(angles),
            heights,
        ])
    elif pattern is TrajectoryPattern.U_PATH:
        rx = extent[0] / 2 + standoff
        ry = extent[1] / 2 + standoff
        corners = np.array([
            [center[0] - rx, center[1], center[2]],
            [center[0] - rx, center[1] - ry, center[2]],
            [center[0] + rx, center[1] - ry, center[2]],
            [center[0] + rx, center[1], center[2]],
        ])
        positions = _uniform_on_polyline(corners, points)
    else:
        t = 2 * math.pi * np.arange(points) / points
        positions = np.column_stack([
            np.full(points, box.min_corner[0] - standoff),
            center[1] + extent[1] / 2 * np.sin(t),
            center[2] + extent[2] / 4 * np.sin(2 * t),
        ])

    steps = np.linalg.norm(np.diff(positions, axis=0), axis=1)
    times = np.concatenate([[0.0], np.cumsum(steps)]) / speed
    trajectory = Trajectory(times, positions, aim_at_structure(positions, structure),
                            label=f"{pattern.value}_{points}")
    logger.info(f"Синтетическая демонстрация {trajectory.label}: длина {trajectory.path_length():.2f} м")
    return trajectory
