"""
Demonstration Encoding
======================
Разбиение демонстрационной траектории на сегменты по перекрытию
видимости и сжатие каждого сегмента в точку обзора (inspection viewpoint).
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from geometry.core import PointCloud
from geometry.trajectory import Pose, Trajectory, orientation_from_forward
from services.visibility import CameraModel, OccupancyGrid, VisibilitySet, visible_points
from utils.errors import (
    EmptyInputError,
    InvalidParameterError,
    UndefinedMetricError,
    ViewpointBlindError,
)

logger = logging.getLogger(__name__)


class LambdaMode(str, Enum):
    """Нормировка перекрытия при сравнении с λ"""
    ABSOLUTE = "absolute"              # число общих точек
    FRAC_OF_TOTAL = "frac_of_total"    # доля от |V_D|
    FRAC_OF_START = "frac_of_start"    # доля от |seg_start|


class VisibilitySource(str, Enum):
    """Откуда берётся видимость точки обзора"""
    CENTROID = "centroid"
    UNION = "union"


@dataclass(frozen=True)
class Segment:
    """Непрерывный отрезок поз [start, end] (обе границы включительно)"""
    start: int
    end: int

    def __post_init__(self):
        if self.start < 0 or self.end < self.start:
            raise InvalidParameterError(f"Invalid segment [{self.start}, {self.end}]")

    @property
    def indices(self) -> range:
        return range(self.start, self.end + 1)

    def __len__(self) -> int:
        return self.end - self.start + 1

    def to_dict(self) -> dict:
        return {"start": self.start, "end": self.end, "size": len(self)}


@dataclass
class InspectionViewpoint:
    """Точка обзора: поза, множество видимости, сегмент-источник, время зависания"""
    pose: Pose
    visibility: VisibilitySet
    source_segment: int
    dwell_time: float = 0.0
    mid_time: float = 0.0

    @property
    def position(self) -> np.ndarray:
        return self.pose.position

    def with_pose(self, pose: Pose) -> "InspectionViewpoint":
        return InspectionViewpoint(pose, self.visibility, self.source_segment,
                                   self.dwell_time, self.mid_time)

    def to_dict(self) -> dict:
        return {
            "segment": self.source_segment,
            "position": self.pose.position.tolist(),
            "orientation": self.pose.orientation.tolist(),
            "visible_points": len(self.visibility),
            "dwell_time": self.dwell_time,
            "mid_time": self.mid_time,
        }


def _normalized_overlap(common: int, start_size: int, total_size: int, mode: LambdaMode) -> float:
    if mode is LambdaMode.ABSOLUTE:
        return float(common)
    denominator = total_size if mode is LambdaMode.FRAC_OF_TOTAL else start_size
    # 0/0 считается нулевым перекрытием
    return common / denominator if denominator > 0 else 0.0


def validate_lambda(lam: float, mode: LambdaMode):
    if mode is LambdaMode.ABSOLUTE:
        if lam <= 0 or float(lam) != int(lam):
            raise InvalidParameterError(f"λ must be a positive integer in absolute mode, got {lam}")
    elif not 0 < lam <= 1:
        raise InvalidParameterError(f"λ must be in (0, 1] in {mode.value} mode, got {lam}")


def segment_trajectory(
    per_pose_visibility: list[VisibilitySet],
    total: VisibilitySet,
    lam: float = 0.05,
    mode: LambdaMode = LambdaMode.FRAC_OF_TOTAL,
) -> list[Segment]:
    """
    Сегментация: разрыв перед позой q, если нормированное перекрытие
    seg_start ∩ v_q меньше λ; после разрыва seg_start = v_q.

    Args:
        per_pose_visibility: множества видимости поз демонстрации по порядку
        total: объединение V, знаменатель в режиме frac_of_total
        lam: порог перекрытия λ
        mode: способ нормировки перекрытия

    Returns:
        Сегменты [start, end] подряд, без пропусков, покрывающие все позы.
    """
    mode = LambdaMode(mode)
    if not per_pose_visibility:
        raise EmptyInputError("Segmentation needs at least one pose")
    validate_lambda(lam, mode)

    segments = []
    start = 0
    seg_start = per_pose_visibility[0]
    for q in range(1, len(per_pose_visibility)):
        current = per_pose_visibility[q]
        overlap = _normalized_overlap(seg_start.intersection_size(current), len(seg_start), len(total), mode)
        if overlap < lam:
            segments.append(Segment(start, q - 1))
            start = q
            seg_start = current
    segments.append(Segment(start, len(per_pose_visibility) - 1))

    logger.info(f"Сегментация (λ={lam}, {mode.value}): {len(per_pose_visibility)} поз -> "
                f"{len(segments)} сегментов")
    return segments


def _segment_orientation(
    members: list[Pose],
    structure: PointCloud,
    member_sets: list[VisibilitySet],
) -> np.ndarray:
    first = members[0].orientation
    if all(np.allclose(np.abs(first @ p.orientation), 1.0, atol=1e-12) for p in members[1:]):
        return first

    forward = np.mean([p.forward() for p in members], axis=0)
    if np.linalg.norm(forward) > 1e-9:
        return orientation_from_forward(forward)

    # противоположные взгляды: смотрим на центр общего видимого участка
    union = VisibilitySet.union_all(member_sets)
    center = np.mean([p.position for p in members], axis=0)
    if not union.is_empty():
        direction = structure.points[union.indices].mean(axis=0) - center
        if np.linalg.norm(direction) > 1e-12:
            return orientation_from_forward(direction)
    logger.warning("Не удалось определить направление сегмента, берётся первая поза")
    return first


def extract_viewpoints(
    segments: list[Segment],
    trajectory: Trajectory,
    camera: CameraModel,
    structure: PointCloud,
    per_pose_visibility: Optional[list[VisibilitySet]] = None,
    *,
    occlusion: bool = False,
    occupancy: Optional[OccupancyGrid] = None,
    visibility_source: VisibilitySource = VisibilitySource.CENTROID,
) -> list[InspectionViewpoint]:
    """
    Точка обзора сегмента: позиция — центроид позиций, ориентация —
    нормированное среднее направлений взгляда. Видимость пересчитывается
    из центроидной позы (или объединяется по позам сегмента).
    """
    source = VisibilitySource(visibility_source)
    if per_pose_visibility is None:
        per_pose_visibility = [visible_points(p, camera, structure, occlusion, occupancy) for p in trajectory]

    viewpoints = []
    for number, segment in enumerate(segments):
        if segment.end >= len(trajectory):
            raise InvalidParameterError(f"Segment {number} exceeds trajectory length {len(trajectory)}")
        members = [trajectory.pose(i) for i in segment.indices]
        member_sets = [per_pose_visibility[i] for i in segment.indices]

        position = np.mean([p.position for p in members], axis=0)
        pose = Pose(position, _segment_orientation(members, structure, member_sets))

        if source is VisibilitySource.UNION:
            visibility = VisibilitySet.union_all(member_sets)
        else:
            visibility = visible_points(pose, camera, structure, occlusion, occupancy)
        if visibility.is_empty():
            raise ViewpointBlindError(number)

        t_start = float(trajectory.times[segment.start])
        t_end = float(trajectory.times[segment.end])
        viewpoints.append(InspectionViewpoint(
            pose=pose,
            visibility=visibility,
            source_segment=number,
            dwell_time=t_end - t_start,
            mid_time=(t_start + t_end) / 2.0,
        ))

    logger.info(f"Извлечено точек обзора: {len(viewpoints)}")
    return viewpoints


def encoding_fidelity(viewpoints: list[InspectionViewpoint], total: VisibilitySet) -> float:
    """Доля V_D, покрытая объединением видимости точек обзора"""
    if total.is_empty():
        raise UndefinedMetricError("Demonstration sees no points, fidelity is undefined")
    covered = VisibilitySet.union_all(vp.visibility for vp in viewpoints)
    return covered.intersection_size(total) / len(total)
