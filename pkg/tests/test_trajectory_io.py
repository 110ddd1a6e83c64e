"""Позы, траектории и форматы файлов"""

import numpy as np
import pytest

from geometry.core import PointCloud
from geometry.io import (
    TRAJECTORY_HEADER,
    read_cloud,
    read_ply,
    read_trajectory,
    read_xyz,
    write_cloud,
    write_trajectory,
)
from geometry.trajectory import Pose, Trajectory, aim_at_structure, orientation_from_forward
from utils.errors import InvalidParameterError, ParseError


class TestPose:
    @pytest.mark.parametrize("forward", [(1, 0, 0), (0, 1, 0), (-1, 0, 0), (0.3, -0.4, 0.5), (0, 0, -1)])
    def test_forward_matches_requested_direction(self, forward):
        pose = Pose([0, 0, 0], orientation_from_forward(forward))
        expected = np.array(forward, dtype=float) / np.linalg.norm(forward)
        assert np.allclose(pose.forward(), expected, atol=1e-12)

    def test_canonical_sign(self):
        quat = orientation_from_forward([-1, 0, 0])
        assert quat[0] >= 0

    def test_looking_at(self):
        pose = Pose.looking_at([0, 0, 0], [0, 5, 0])
        assert np.allclose(pose.forward(), [0, 1, 0], atol=1e-12)

    def test_zero_forward_rejected(self):
        with pytest.raises(InvalidParameterError):
            orientation_from_forward([0, 0, 0])

    def test_quaternion_is_normalized(self):
        pose = Pose([1, 2, 3], [2, 0, 0, 0])
        assert np.allclose(pose.orientation, [1, 0, 0, 0])

    def test_aim_at_structure(self):
        structure = PointCloud([[0, 0, 0], [10, 0, 0]])
        quats = aim_at_structure([[-3, 0, 0], [13, 0, 0]], structure)
        assert np.allclose(Pose([0, 0, 0], quats[0]).forward(), [1, 0, 0], atol=1e-12)
        assert np.allclose(Pose([0, 0, 0], quats[1]).forward(), [-1, 0, 0], atol=1e-12)


class TestTrajectory:
    def _line(self) -> Trajectory:
        positions = [[0, 0, 0], [3, 0, 0], [3, 4, 0]]
        return Trajectory([0, 1.5, 3.5], positions, [[1, 0, 0, 0]] * 3, label="line")

    def test_lengths_and_speed(self):
        traj = self._line()
        assert np.allclose(traj.cumulative_length(), [0, 3, 7])
        assert traj.path_length() == 7
        assert traj.duration == 3.5
        assert traj.average_speed() == pytest.approx(2.0)

    def test_rejects_decreasing_times(self):
        with pytest.raises(InvalidParameterError):
            Trajectory([0, 2, 1], np.zeros((3, 3)), [[1, 0, 0, 0]] * 3)

    def test_rejects_mismatched_arrays(self):
        with pytest.raises(InvalidParameterError):
            Trajectory([0, 1], np.zeros((3, 3)), [[1, 0, 0, 0]] * 3)

    def test_with_positions_keeps_times(self):
        traj = self._line()
        moved = traj.with_positions(traj.positions * 2)
        assert np.array_equal(moved.times, traj.times)
        assert np.array_equal(moved.orientations, traj.orientations)
        assert moved.path_length() == 14

    def test_densified_keeps_endpoints(self):
        start = orientation_from_forward([1, 0, 0])
        end = orientation_from_forward([0, 1, 0])
        traj = Trajectory([0, 2], [[0, 0, 0], [2, 0, 0]], [start, end])
        dense = traj.densified(0.5)
        assert len(dense) == 5
        assert np.allclose(dense.positions[:, 0], [0, 0.5, 1, 1.5, 2])
        assert np.allclose(dense.times, [0, 0.5, 1, 1.5, 2])
        assert np.allclose(dense.pose(0).forward(), [1, 0, 0], atol=1e-12)
        assert np.allclose(dense.pose(4).forward(), [0, 1, 0], atol=1e-12)
        # середина slerp делит угол пополам
        assert np.allclose(dense.pose(2).forward(), np.array([1, 1, 0]) / np.sqrt(2), atol=1e-9)

    def test_from_poses_default_times(self):
        traj = Trajectory.from_poses([Pose([0, 0, 0]), Pose([1, 0, 0])])
        assert np.array_equal(traj.times, [0, 1])


class TestClouds:
    def test_ply_round_trip(self, tmp_path, rng):
        cloud = PointCloud(rng.normal(size=(25, 3)))
        path = str(tmp_path / "cloud.ply")
        write_cloud(cloud, path)
        assert np.array_equal(read_cloud(path).points, cloud.points)

    def test_xyz_round_trip(self, tmp_path, rng):
        cloud = PointCloud(rng.normal(size=(10, 3)))
        path = str(tmp_path / "cloud.xyz")
        write_cloud(cloud, path)
        assert np.array_equal(read_cloud(path).points, cloud.points)

    def test_ply_skips_extra_properties_and_elements(self, tmp_path):
        path = tmp_path / "mesh.ply"
        path.write_text(
            "ply\nformat ascii 1.0\ncomment test\n"
            "element vertex 2\nproperty float nx\nproperty float x\nproperty float y\nproperty float z\n"
            "element face 1\nproperty list uchar int vertex_indices\nend_header\n"
            "9 1 2 3\n9 4 5 6\n3 0 1 1\n"
        )
        assert np.array_equal(read_ply(str(path)).points, [[1, 2, 3], [4, 5, 6]])

    def test_ply_binary_rejected(self, tmp_path):
        path = tmp_path / "bin.ply"
        path.write_text("ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n")
        with pytest.raises(ParseError):
            read_ply(str(path))

    def test_ply_reports_line_number(self, tmp_path):
        path = tmp_path / "bad.ply"
        path.write_text("ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\n"
                        "property float y\nproperty float z\nend_header\n0 0 0\n1 nan 1\n")
        with pytest.raises(ParseError, match=r"bad\.ply:9"):
            read_ply(str(path))

    def test_xyz_comments_and_commas(self, tmp_path):
        path = tmp_path / "pts.xyz"
        path.write_text("# header\n1,2,3\n\n4 5 6\n")
        assert np.array_equal(read_xyz(str(path)).points, [[1, 2, 3], [4, 5, 6]])

    def test_xyz_short_line(self, tmp_path):
        path = tmp_path / "pts.xyz"
        path.write_text("1 2 3\n4 5\n")
        with pytest.raises(ParseError, match=":2"):
            read_xyz(str(path))


class TestTrajectoryCsv:
    def test_round_trip_is_exact(self, tmp_path, rng):
        positions = rng.normal(size=(6, 3))
        quats = np.array([orientation_from_forward(f) for f in rng.normal(size=(6, 3))])
        traj = Trajectory(np.arange(6) * 0.1, positions, quats)
        path = str(tmp_path / "traj.csv")
        write_trajectory(traj, path)

        with open(path) as f:
            assert f.readline().strip() == ",".join(TRAJECTORY_HEADER)
        again = read_trajectory(path)
        assert np.array_equal(again.times, traj.times)
        assert np.array_equal(again.positions, traj.positions)
        assert np.allclose(again.orientations, traj.orientations, atol=1e-15)
        assert not again.orientation_fallback

    def test_positions_only_uses_fallback(self, tmp_path):
        path = tmp_path / "pos.csv"
        path.write_text("t,x,y,z\n0,-3,0,0\n1,0,-3,0\n")
        structure = PointCloud([[0, 0, 0]])
        traj = read_trajectory(str(path), structure=structure)
        assert traj.orientation_fallback
        assert np.allclose(traj.pose(0).forward(), [1, 0, 0], atol=1e-12)
        assert np.allclose(traj.pose(1).forward(), [0, 1, 0], atol=1e-12)

    def test_positions_only_without_structure(self, tmp_path):
        path = tmp_path / "pos.csv"
        path.write_text("t,x,y,z\n0,1,2,3\n")
        with pytest.raises(ParseError):
            read_trajectory(str(path))

    def test_missing_columns(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,x,y\n0,1,2\n")
        with pytest.raises(ParseError, match="header"):
            read_trajectory(str(path))

    def test_infinite_value(self, tmp_path):
        path = tmp_path / "inf.csv"
        path.write_text("t,x,y,z,qw,qx,qy,qz\n0,0,0,0,1,0,0,0\n1,inf,0,0,1,0,0,0\n")
        with pytest.raises(ParseError, match=r"inf\.csv:3"):
            read_trajectory(str(path))
