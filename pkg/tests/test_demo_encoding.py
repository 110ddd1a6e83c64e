"""Сегментация демонстрации и точки обзора"""

import numpy as np
import pytest

from geometry.core import PointCloud
from geometry.trajectory import Pose, Trajectory, orientation_from_forward
from services.demo_encoding import (
    InspectionViewpoint,
    LambdaMode,
    Segment,
    VisibilitySource,
    encoding_fidelity,
    extract_viewpoints,
    segment_trajectory,
)
from services.visibility import CameraModel, VisibilitySet, trajectory_visibility
from tests.conftest import face_trajectory
from utils.errors import EmptyInputError, InvalidParameterError, UndefinedMetricError, ViewpointBlindError


def sliding_window_sets(poses: int = 40, width: int = 12, shift: int = 1) -> list[VisibilitySet]:
    return [VisibilitySet(range(i * shift, i * shift + width)) for i in range(poses)]


def assert_partition(segments: list[Segment], n: int):
    covered = [i for segment in segments for i in segment.indices]
    assert covered == list(range(n))


class TestSegmentation:
    def test_identical_sets_give_one_segment(self):
        sets = [VisibilitySet([1, 2, 3])] * 6
        for lam in (0.05, 0.5, 1.0):
            segments = segment_trajectory(sets, VisibilitySet([1, 2, 3]), lam)
            assert segments == [Segment(0, 5)]

    def test_disjoint_sets_break(self):
        sets = [VisibilitySet([1, 2]), VisibilitySet([3, 4])]
        segments = segment_trajectory(sets, VisibilitySet([1, 2, 3, 4]), 0.1)
        assert segments == [Segment(0, 0), Segment(1, 1)]

    def test_seg_start_is_reset_after_break(self):
        # поза 2 перекрывается с позой 1, но не с началом сегмента (поза 0)
        sets = [VisibilitySet([0, 1]), VisibilitySet([1, 2]), VisibilitySet([2, 3])]
        segments = segment_trajectory(sets, VisibilitySet(range(4)), 1, LambdaMode.ABSOLUTE)
        assert segments == [Segment(0, 1), Segment(2, 2)]

    def test_frac_of_start_mode(self):
        sets = [VisibilitySet(range(10)), VisibilitySet(range(7, 20))]
        total = VisibilitySet(range(20))
        assert len(segment_trajectory(sets, total, 0.25, LambdaMode.FRAC_OF_START)) == 1
        assert len(segment_trajectory(sets, total, 0.35, LambdaMode.FRAC_OF_START)) == 2

    def test_empty_sets_break(self):
        sets = [VisibilitySet.empty(), VisibilitySet.empty()]
        segments = segment_trajectory(sets, VisibilitySet.empty(), 0.5)
        assert segments == [Segment(0, 0), Segment(1, 1)]

    def test_lambda_sweep_is_monotone(self):
        sets = sliding_window_sets()
        total = VisibilitySet.union_all(sets)
        counts = []
        for lam in np.linspace(0.01, 0.25, 20):
            segments = segment_trajectory(sets, total, float(lam))
            assert_partition(segments, len(sets))
            counts.append(len(segments))
        assert all(a <= b for a, b in zip(counts, counts[1:]))
        assert counts[0] < counts[-1]

    def test_four_face_orbit(self, cube, patch_camera):
        trajectory = face_trajectory(lateral=(-0.02, 0.02))
        per_pose, total = trajectory_visibility(trajectory, patch_camera, cube)
        segments = segment_trajectory(per_pose, total, 0.05, LambdaMode.FRAC_OF_TOTAL)
        assert segments == [Segment(0, 1), Segment(2, 3), Segment(4, 5), Segment(6, 7)]

    @pytest.mark.parametrize("lam,mode", [
        (0.0, LambdaMode.FRAC_OF_TOTAL),
        (1.5, LambdaMode.FRAC_OF_START),
        (2.5, LambdaMode.ABSOLUTE),
        (0, LambdaMode.ABSOLUTE),
    ])
    def test_invalid_lambda(self, lam, mode):
        with pytest.raises(InvalidParameterError):
            segment_trajectory([VisibilitySet([1])], VisibilitySet([1]), lam, mode)

    def test_empty_input(self):
        with pytest.raises(EmptyInputError):
            segment_trajectory([], VisibilitySet.empty())


class TestViewpoints:
    def test_single_pose_segment_keeps_pose(self, cube, patch_camera):
        trajectory = face_trajectory()
        viewpoints = extract_viewpoints([Segment(0, 0)], trajectory, patch_camera, cube)
        assert np.array_equal(viewpoints[0].position, trajectory.positions[0])
        assert np.allclose(viewpoints[0].pose.orientation, trajectory.orientations[0])
        assert viewpoints[0].dwell_time == 0.0

    def test_centroid_of_two_poses(self):
        structure = PointCloud([[x, 0, 5] for x in np.linspace(-2, 4, 13)])
        quat = orientation_from_forward([0, 0, 1])
        trajectory = Trajectory([0, 4], [[0, 0, 0], [2, 0, 0]], [quat, quat])
        camera = CameraModel(90, 90, 1, 20)
        (viewpoint,) = extract_viewpoints([Segment(0, 1)], trajectory, camera, structure)
        assert np.allclose(viewpoint.position, [1, 0, 0])
        assert np.allclose(viewpoint.pose.forward(), [0, 0, 1], atol=1e-12)
        assert viewpoint.dwell_time == 4.0
        assert viewpoint.mid_time == 2.0

    def test_opposite_views_face_visible_region(self):
        structure = PointCloud([[0, 0, 0], [0, 0, 1], [0, 1, 0], [0, 1, 1]])
        forward = orientation_from_forward([1, 0, 0])
        backward = orientation_from_forward([-1, 0, 0])
        trajectory = Trajectory([0, 1], [[-3, 0.5, 0.5], [-3, 0.5, 0.5]], [forward, backward])
        camera = CameraModel(90, 90, 1, 20)
        per_pose, _ = trajectory_visibility(trajectory, camera, structure)
        (viewpoint,) = extract_viewpoints([Segment(0, 1)], trajectory, camera, structure, per_pose)
        assert np.allclose(viewpoint.pose.forward(), [1, 0, 0], atol=1e-9)

    def test_blind_viewpoint(self, cube, patch_camera):
        away = Pose.looking_at([-5, 0, 1], [-10, 0, 1])
        trajectory = Trajectory.from_poses([away])
        with pytest.raises(ViewpointBlindError) as info:
            extract_viewpoints([Segment(0, 0)], trajectory, patch_camera, cube)
        assert info.value.segment_index == 0

    def test_union_visibility_source(self, cube, patch_camera):
        trajectory = face_trajectory(lateral=(-0.3, 0.3))
        per_pose, total = trajectory_visibility(trajectory, patch_camera, cube)
        segments = [Segment(0, 1), Segment(2, 3), Segment(4, 5), Segment(6, 7)]
        union = extract_viewpoints(segments, trajectory, patch_camera, cube, per_pose,
                                   visibility_source=VisibilitySource.UNION)
        assert encoding_fidelity(union, total) == 1.0

    def test_face_orbit_fidelity(self, cube, patch_camera):
        trajectory = face_trajectory(lateral=(-0.02, 0.02))
        per_pose, total = trajectory_visibility(trajectory, patch_camera, cube)
        segments = segment_trajectory(per_pose, total, 0.05)
        viewpoints = extract_viewpoints(segments, trajectory, patch_camera, cube, per_pose)
        assert len(viewpoints) == 4
        assert encoding_fidelity(viewpoints, total) >= 0.95
        assert [vp.source_segment for vp in viewpoints] == [0, 1, 2, 3]

    def test_fidelity_undefined_for_empty_total(self):
        viewpoint = InspectionViewpoint(Pose([0, 0, 0]), VisibilitySet([1]), 0)
        with pytest.raises(UndefinedMetricError):
            encoding_fidelity([viewpoint], VisibilitySet.empty())

    def test_segment_validation(self):
        with pytest.raises(InvalidParameterError):
            Segment(3, 1)
