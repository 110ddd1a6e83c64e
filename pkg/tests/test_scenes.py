"""Синтетические конструкции и демонстрации"""

import numpy as np
import pytest

from geometry.core import NnIndex, compute_aabb
from services.scenes import (
    StructureKind,
    StructureSpec,
    TrajectoryPattern,
    box_surface,
    synth_demo_trajectory,
    synth_structure,
)
from tests.conftest import cube_cloud
from utils.errors import InvalidParameterError


class TestStructures:
    def test_box_side_two_spacing_one(self):
        points = box_surface([-1, -1, -1], [1, 1, 1], 1.0)
        assert points.shape == (26, 3)
        assert not np.any(np.all(points == 0, axis=1))

    def test_cube_spec_single_dimension(self):
        cloud = synth_structure(StructureSpec("box", (2.0,), 1.0))
        assert len(cloud) == 26
        box = compute_aabb(cloud)
        assert np.allclose(box.min_corner, [-1, -1, 0])
        assert np.allclose(box.max_corner, [1, 1, 2])

    def test_cuboid_extent(self):
        cloud = synth_structure(StructureSpec(StructureKind.CUBOID, (2, 2, 4), 0.5))
        assert np.allclose(compute_aabb(cloud).extent, [2, 2, 4])

    def test_cylinder_lateral_surface(self):
        radius, height, spacing = 0.5, 3.0, 0.1
        cloud = synth_structure(StructureSpec(StructureKind.CYLINDER, (radius, height), spacing))
        r = np.hypot(cloud.points[:, 0], cloud.points[:, 1])
        assert np.all(np.abs(r - radius) <= spacing / 2)
        assert cloud.points[:, 2].min() == 0.0 and cloud.points[:, 2].max() == height

    @pytest.mark.parametrize("kind,dims", [
        (StructureKind.BRIDGE, (8.0, 2.0, 3.0)),
        (StructureKind.HULL, (10.0, 3.0, 1.5)),
    ])
    def test_other_kinds_fit_their_box(self, kind, dims):
        cloud = synth_structure(StructureSpec(kind, dims, 0.2))
        extent = compute_aabb(cloud).extent
        assert len(cloud) > 100
        assert np.all(extent <= np.array(dims) + 1e-9)

    def test_determinism_with_seed(self):
        spec = StructureSpec(StructureKind.HULL, (6.0, 2.0, 1.0), 0.2, seed=7, jitter=0.01)
        first, second = synth_structure(spec), synth_structure(spec)
        assert np.array_equal(first.points, second.points)
        other = synth_structure(StructureSpec(StructureKind.HULL, (6.0, 2.0, 1.0), 0.2, seed=8, jitter=0.01))
        assert not np.array_equal(first.points, other.points)

    @pytest.mark.parametrize("kwargs", [
        {"kind": "box", "dimensions": (2.0, 1.0), "sample_spacing": 0.1},
        {"kind": "cylinder", "dimensions": (1.0, -2.0), "sample_spacing": 0.1},
        {"kind": "box", "dimensions": (1.0,), "sample_spacing": 2.0},
        {"kind": "box", "dimensions": (1.0,), "sample_spacing": 0.1, "jitter": -1.0},
    ])
    def test_invalid_specs(self, kwargs):
        with pytest.raises(InvalidParameterError):
            StructureSpec(**kwargs)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            StructureSpec("tower", (1.0,), 0.1)


class TestDemoTrajectories:
    def test_orbit_radius_and_height(self, cube):
        trajectory = synth_demo_trajectory(TrajectoryPattern.ORBIT, cube, 1.0, 12)
        radius = np.hypot(trajectory.positions[:, 0], trajectory.positions[:, 1])
        assert np.allclose(radius, np.sqrt(2) + 1.0)
        assert np.allclose(trajectory.positions[:, 2], 1.0)

    def test_u_path(self, cube):
        trajectory = synth_demo_trajectory(TrajectoryPattern.U_PATH, cube, 1.0, 3)
        assert np.allclose(trajectory.positions, [[-2, 0, 1], [0, -2, 1], [2, 0, 1]])
        assert np.allclose(trajectory.pose(0).forward(), [1, 0, 0], atol=1e-12)
        assert np.allclose(trajectory.pose(1).forward(), [0, 1, 0], atol=1e-12)

    def test_spiral_rises(self, cube):
        trajectory = synth_demo_trajectory(TrajectoryPattern.SPIRAL, cube, 0.5, 30)
        assert np.all(np.diff(trajectory.positions[:, 2]) > 0)

    def test_figure_eight_stays_in_front(self, cube):
        trajectory = synth_demo_trajectory(TrajectoryPattern.FIGURE_EIGHT, cube, 0.8, 16)
        assert np.allclose(trajectory.positions[:, 0], -1.8)

    def test_constant_speed(self, cube):
        trajectory = synth_demo_trajectory(TrajectoryPattern.ORBIT, cube, 1.0, 20, speed=2.0)
        assert trajectory.average_speed() == pytest.approx(2.0)

    @pytest.mark.parametrize("pattern", list(TrajectoryPattern))
    def test_poses_keep_standoff(self, pattern):
        structure = cube_cloud(spacing=0.2)
        trajectory = synth_demo_trajectory(pattern, structure, 0.5, 24)
        _, distances = NnIndex(structure).nearest_many(trajectory.positions)
        assert np.all(distances >= 0.5 - 1e-9)

    def test_invalid_arguments(self, cube):
        with pytest.raises(InvalidParameterError):
            synth_demo_trajectory(TrajectoryPattern.ORBIT, cube, 0.0, 10)
        with pytest.raises(InvalidParameterError):
            synth_demo_trajectory(TrajectoryPattern.ORBIT, cube, 1.0, 0)
