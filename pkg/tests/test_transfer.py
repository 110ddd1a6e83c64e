"""Перенос точек обзора и базовое масштабирование"""

import numpy as np

from geometry.core import AxisStats, PointCloud, axis_stats, compute_aabb
from geometry.trajectory import Pose, Trajectory
from services.demo_encoding import InspectionViewpoint
from services.registration import CorrespondenceMap
from services.transfer import baseline_scale_trajectory, transfer_positions, transfer_viewpoints
from services.visibility import VisibilitySet


class TestTransferPositions:
    def test_hand_arithmetic(self):
        demo = AxisStats([0, 0, 0], [1, 1, 1])
        target = AxisStats([10, 0, 0], [2, 2, 2])
        assert np.allclose(transfer_positions([[1, 1, 1]], demo, target), [[12, 2, 2]])

    def test_swapped_stats_invert(self, rng):
        demo = AxisStats(rng.normal(size=3), rng.uniform(0.5, 3, size=3))
        target = AxisStats(rng.normal(size=3), rng.uniform(0.5, 3, size=3))
        positions = rng.normal(size=(20, 3)) * 5
        there = transfer_positions(positions, demo, target)
        assert np.allclose(transfer_positions(there, target, demo), positions, atol=1e-9)

    def test_uniform_scale_about_mean(self, rng):
        cloud = PointCloud(rng.normal(size=(300, 3)) * [1, 2, 3] + [4, 5, 6])
        mean = cloud.points.mean(axis=0)
        scaled = PointCloud((cloud.points - mean) * 2.5 + mean)
        positions = rng.normal(size=(10, 3)) * 4
        moved = transfer_positions(positions, axis_stats(cloud), axis_stats(scaled))
        assert np.allclose(moved, (positions - mean) * 2.5 + mean, atol=1e-9)

    def test_affine_equivariance(self, rng):
        demo_cloud = PointCloud(rng.normal(size=(200, 3)))
        target_cloud = PointCloud(rng.normal(size=(200, 3)) * 2)
        positions = rng.normal(size=(5, 3))
        base = transfer_positions(positions, axis_stats(demo_cloud), axis_stats(target_cloud))

        a, b = np.array([3.0, 0.5, 2.0]), np.array([-1.0, 7.0, 0.0])
        remapped_target = PointCloud(target_cloud.points * a + b)
        moved = transfer_positions(positions, axis_stats(demo_cloud), axis_stats(remapped_target))
        assert np.allclose(moved, base * a + b, atol=1e-9)


class TestTransferViewpoints:
    def _viewpoint(self) -> InspectionViewpoint:
        return InspectionViewpoint(Pose([1, 1, 1], [0.5, 0.5, 0.5, 0.5]), VisibilitySet([0, 2]), 3, 1.5, 7.0)

    def test_orientation_copied_and_visibility_mapped(self):
        corr = CorrespondenceMap([4, 4, 9], [0, 0, 0])
        (moved,) = transfer_viewpoints(
            [self._viewpoint()], AxisStats([0, 0, 0], [1, 1, 1]), AxisStats([10, 0, 0], [2, 2, 2]), corr,
        )
        assert np.allclose(moved.position, [12, 2, 2])
        assert np.allclose(moved.pose.orientation, [0.5, 0.5, 0.5, 0.5])
        assert moved.visibility.to_list() == [4, 9]
        assert (moved.source_segment, moved.dwell_time, moved.mid_time) == (3, 1.5, 7.0)

    def test_without_correspondences_keeps_visibility(self):
        (moved,) = transfer_viewpoints([self._viewpoint()], AxisStats([0] * 3, [1] * 3), AxisStats([0] * 3, [1] * 3))
        assert moved.visibility.to_list() == [0, 2]

    def test_empty(self):
        assert transfer_viewpoints([], AxisStats([0] * 3, [1] * 3), AxisStats([0] * 3, [1] * 3)) == []


class TestBaseline:
    def _demo(self, rng) -> Trajectory:
        positions = rng.uniform(-3, 3, size=(15, 3))
        return Trajectory(np.arange(15) * 0.5, positions, [[1, 0, 0, 0]] * 15)

    def test_identical_boxes_keep_trajectory(self, rng):
        demo = self._demo(rng)
        box = compute_aabb(PointCloud([[-1, -1, 0], [1, 1, 2]]))
        result = baseline_scale_trajectory(demo, box, box)
        assert np.allclose(result.positions, demo.positions, atol=1e-12)

    def test_doubled_box_doubles_about_center(self, rng):
        demo = self._demo(rng)
        small = compute_aabb(PointCloud([[-1, -1, 0], [1, 1, 2]]))
        large = compute_aabb(PointCloud([[-2, -2, -1], [2, 2, 3]]))
        result = baseline_scale_trajectory(demo, small, large)
        center = np.array([0.0, 0.0, 1.0])
        assert np.allclose(result.positions, center + 2 * (demo.positions - center), atol=1e-12)

    def test_keeps_count_times_and_orientations(self, rng):
        demo = self._demo(rng)
        small = compute_aabb(PointCloud([[0, 0, 0], [1, 2, 3]]))
        large = compute_aabb(PointCloud([[5, 5, 5], [6, 9, 7]]))
        result = baseline_scale_trajectory(demo, small, large)
        assert len(result) == len(demo)
        assert np.array_equal(result.times, demo.times)
        assert np.array_equal(result.orientations, demo.orientations)

    def test_flat_axis(self):
        demo = Trajectory([0, 1], [[0, 0, 5], [1, 0, 5]], [[1, 0, 0, 0]] * 2)
        flat = compute_aabb(PointCloud([[0, 0, 0], [1, 1, 0]]))
        result = baseline_scale_trajectory(demo, flat, flat)
        assert np.all(np.isfinite(result.positions))
        assert np.allclose(result.positions, demo.positions)
