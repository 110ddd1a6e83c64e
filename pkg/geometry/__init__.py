"""
Geometry
========
Облака точек, позы, траектории и форматы файлов.
"""

from geometry.core import (
    STD_FLOOR,
    Aabb,
    AxisStats,
    NnIndex,
    PointCloud,
    RigidTransform,
    axis_stats,
    compute_aabb,
    default_voxel_size,
    destandardize,
    standardize,
    voxel_downsample,
)
from geometry.trajectory import Pose, Trajectory, aim_at_structure, orientation_from_forward

__all__ = [
    "STD_FLOOR",
    "Aabb",
    "AxisStats",
    "NnIndex",
    "PointCloud",
    "RigidTransform",
    "axis_stats",
    "compute_aabb",
    "default_voxel_size",
    "destandardize",
    "standardize",
    "voxel_downsample",
    "Pose",
    "Trajectory",
    "orientation_from_forward",
    "aim_at_structure",
]
