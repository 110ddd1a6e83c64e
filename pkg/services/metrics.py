"""
Metrics
=======
Процент покрытия по соответствиям и дискретное расстояние Фреше
между стандартизованными траекториями.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from geometry.core import STD_FLOOR, PointCloud, axis_stats, standardize
from geometry.trajectory import Trajectory
from services.registration import CorrespondenceMap
from services.visibility import CameraModel, OccupancyGrid, VisibilitySet, trajectory_visibility
from utils.errors import EmptyInputError, UndefinedMetricError

logger = logging.getLogger(__name__)


@dataclass
class Evaluation:
    """Метрики одной целевой траектории"""
    coverage_percent: float
    frechet: float
    demo_visible: int
    target_visible: int
    target_poses: int
    blind_poses: list[int] = field(default_factory=list)
    dense_coverage_percent: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "coverage_percent": self.coverage_percent,
            "frechet": self.frechet,
            "demo_visible": self.demo_visible,
            "target_visible": self.target_visible,
            "target_poses": self.target_poses,
            "blind_poses": self.blind_poses,
            "dense_coverage_percent": self.dense_coverage_percent,
        }


def coverage_percentage(demo_total: VisibilitySet, correspondences: CorrespondenceMap,
                        target_total: VisibilitySet) -> float:
    """100 · |{k ∈ V_D : C(k) ∈ V_T}| / |V_D|"""
    if demo_total.is_empty():
        raise UndefinedMetricError("Demonstration visibility is empty, coverage is undefined")
    mapped = correspondences.map_indices(demo_total.indices)
    seen = np.isin(mapped, target_total.indices)
    return 100.0 * float(np.count_nonzero(seen)) / len(demo_total)


def standardized_positions(trajectory: Trajectory) -> np.ndarray:
    """Позиции в z-оценках собственной статистики траектории"""
    trajectory.require_nonempty()
    if len(trajectory) == 1:
        # одна точка: среднее равно ей самой, СКО берётся по полу
        return np.zeros((1, 3))
    stats = axis_stats(PointCloud(trajectory.positions), STD_FLOOR)
    return standardize(trajectory.positions, stats)


def discrete_frechet(p: np.ndarray, q: np.ndarray) -> float:
    """Дискретное расстояние Фреше: динамика по матрице попарных расстояний"""
    if len(p) == 0 or len(q) == 0:
        raise EmptyInputError("Fréchet distance needs non-empty sequences")
    links = cdist(p, q)
    n, m = links.shape
    ca = np.empty((n, m))
    ca[0, 0] = links[0, 0]
    for i in range(1, n):
        ca[i, 0] = max(ca[i - 1, 0], links[i, 0])
    for j in range(1, m):
        ca[0, j] = max(ca[0, j - 1], links[0, j])
    for i in range(1, n):
        for j in range(1, m):
            ca[i, j] = max(min(ca[i - 1, j], ca[i - 1, j - 1], ca[i, j - 1]), links[i, j])
    return float(ca[n - 1, m - 1])


def frechet_distance(traj_a: Trajectory, traj_b: Trajectory) -> float:
    """Расстояние Фреше после z-нормализации каждой траектории"""
    return discrete_frechet(standardized_positions(traj_a), standardized_positions(traj_b))


def evaluate_plan(
    demo_total: VisibilitySet,
    correspondences: CorrespondenceMap,
    demo_trajectory: Trajectory,
    target_trajectory: Trajectory,
    target_cloud: PointCloud,
    camera: CameraModel,
    *,
    occlusion: bool = False,
    occupancy: Optional[OccupancyGrid] = None,
    dense_step: Optional[float] = None,
) -> Evaluation:
    """
    Покрытие по позам целевой траектории (и, по желанию, вдоль участков
    с шагом dense_step) и расстояние Фреше до демонстрации.

    Args:
        demo_total: V_D, всё, что видела демонстрация
        correspondences: карта индексов демонстрации в индексы цели
        target_cloud: облако, по которому считается видимость цели
        occupancy: сетка занятости цели, нужна при occlusion=True
        dense_step: шаг уплотнения участков, м (None: только по позам)

    Returns:
        Evaluation с процентом покрытия, расстоянием Фреше и списком слепых поз.
    """
    per_pose, target_total = trajectory_visibility(target_trajectory, camera, target_cloud, occlusion, occupancy)
    coverage = coverage_percentage(demo_total, correspondences, target_total)
    frechet = frechet_distance(demo_trajectory, target_trajectory)
    blind = [i for i, vis in enumerate(per_pose) if vis.is_empty()]
    if blind:
        logger.warning(f"Позы без видимых точек: {blind}")

    dense = None
    if dense_step:
        densified = target_trajectory.densified(dense_step)
        _, dense_total = trajectory_visibility(densified, camera, target_cloud, occlusion, occupancy)
        dense = coverage_percentage(demo_total, correspondences, target_total.union(dense_total))

    logger.info(f"Оценка '{target_trajectory.label}': покрытие {coverage:.2f}%, Фреше {frechet:.4f}")
    return Evaluation(
        coverage_percent=coverage,
        frechet=frechet,
        demo_visible=len(demo_total),
        target_visible=len(target_total),
        target_poses=len(target_trajectory),
        blind_poses=blind,
        dense_coverage_percent=dense,
    )
