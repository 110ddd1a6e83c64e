"""
Viewpoint Transfer
==================
Перенос точек обзора демонстрации на целевую конструкцию через z-оценки
облаков, а также базовый метод: масштабирование траектории по габаритам.
"""

import logging
from typing import Optional

import numpy as np

from geometry.core import STD_FLOOR, Aabb, AxisStats, destandardize, standardize
from geometry.trajectory import Trajectory
from services.demo_encoding import InspectionViewpoint
from services.registration import CorrespondenceMap
from services.visibility import VisibilitySet
from utils.errors import DegenerateGeometryError

logger = logging.getLogger(__name__)


def transfer_positions(positions, stats_demo: AxisStats, stats_target: AxisStats) -> np.ndarray:
    """((p − μ_D) / σ_D) · σ_T + μ_T по каждой оси"""
    return destandardize(standardize(positions, stats_demo), stats_target)


def transfer_viewpoints(
    demo_viewpoints: list[InspectionViewpoint],
    stats_demo: AxisStats,
    stats_target: AxisStats,
    correspondences: Optional[CorrespondenceMap] = None,
) -> list[InspectionViewpoint]:
    """
    Начальные целевые точки обзора. Ориентация копируется без изменений.

    Args:
        demo_viewpoints: точки обзора демонстрации
        stats_demo: покоординатная статистика κ_D
        stats_target: покоординатная статистика κ_T
        correspondences: если задана, видимость заменяется образом v_D в целевом облаке

    Returns:
        Точки обзора в мире цели в том же порядке.
    """
    if not demo_viewpoints:
        return []
    positions = transfer_positions([vp.position for vp in demo_viewpoints], stats_demo, stats_target)

    transferred = []
    for vp, position in zip(demo_viewpoints, positions):
        visibility = vp.visibility
        if correspondences is not None:
            visibility = VisibilitySet(correspondences.map_indices(vp.visibility.indices))
        moved = vp.with_pose(vp.pose.with_position(position))
        moved.visibility = visibility
        transferred.append(moved)

    logger.info(f"Перенесено точек обзора: {len(transferred)}")
    return transferred


def baseline_scale_trajectory(demo_trajectory: Trajectory, demo_bbox: Aabb, target_bbox: Aabb) -> Trajectory:
    """
    Базовый метод: p → c_T + (p − c_D) · (габариты_T / габариты_D).
    Время и ориентации сохраняются.
    """
    ratio = target_bbox.floored_extent(STD_FLOOR) / demo_bbox.floored_extent(STD_FLOOR)
    if not np.all(np.isfinite(ratio)) or np.any(ratio <= 0):
        raise DegenerateGeometryError(f"Cannot scale by extents {target_bbox.extent} / {demo_bbox.extent}")

    positions = target_bbox.center + (demo_trajectory.positions - demo_bbox.center) * ratio
    logger.info(f"Базовая траектория: масштаб {np.round(ratio, 4).tolist()}")
    return demo_trajectory.with_positions(positions)
