"""
Сквозные сценарии: перенос между кубом и кубоидом, растяжение грани,
тождественный перенос, безопасная дистанция и отказ для непохожих конструкций.
"""

import time

import numpy as np
import pytest

from config import PlannerSettings
from geometry.core import NnIndex, PointCloud
from geometry.trajectory import Pose, Trajectory
from services.planner import InspectionPlanner
from services.scenes import StructureKind, StructureSpec, synth_demo_trajectory, synth_structure
from tests.conftest import constant_speed_times, cube_cloud, face_trajectory

DESK = dict(fov_h_deg=30.0, fov_v_deg=160.0, safety_m=0.3, max_range_m=50.0, lambda_=0.25)


def assert_safe(result, target: PointCloud, safety: float):
    index = NnIndex(target)
    positions = np.array([vp.position for vp in result.viewpoints])
    _, distances = index.nearest_many(positions)
    assert np.all(distances >= safety)


@pytest.fixture
def cube_to_tall():
    """Куб 2 м и тот же куб, растянутый вдвое по z"""
    cube = cube_cloud()
    tall = PointCloud(cube.points * np.array([1.0, 1.0, 2.0]), "tall")
    demo = synth_demo_trajectory("u_path", cube, standoff=1.0, points=3)
    return cube, demo, tall


@pytest.fixture
def cube_to_long():
    """Куб 2 м с проходом вдоль грани −y и кубоид 6×2×2, растянутый по x"""
    positions = np.array([[x, -1.5, 1.0] for x in (-0.6, 0.0, 0.6)])
    poses = [Pose.looking_at(p, p + np.array([0.0, 1.0, 0.0])) for p in positions]
    demo = Trajectory.from_poses(poses, constant_speed_times(positions), label="face_pass")
    long = synth_structure(StructureSpec(StructureKind.CUBOID, (6.0, 2.0, 2.0), 0.1))
    return cube_cloud(), demo, long


class TestCubeToCuboid:
    def test_full_coverage(self, cube_to_tall):
        cube, demo, tall = cube_to_tall
        planner = InspectionPlanner(PlannerSettings(**DESK))

        started = time.perf_counter()
        results = planner.compare(cube, demo, tall)
        elapsed = time.perf_counter() - started

        ours = results["ours"].report
        baseline = results["baseline"].report
        assert ours.convergence["accepted"] is True
        assert ours.coverage_percent == 100.0
        assert baseline.coverage_percent == 100.0
        assert ours.frechet <= 1.0
        assert ours.flags["planar"] is True
        assert ours.encoding_fidelity >= 0.9
        assert len(ours.segments) == 3
        assert elapsed < 10.0

    def test_viewpoints_keep_clearance(self, cube_to_tall):
        cube, demo, tall = cube_to_tall
        result = InspectionPlanner(PlannerSettings(**DESK)).plan(cube, demo, tall)
        assert_safe(result, tall, 0.3)
        assert np.allclose(result.trajectory.positions[:, 2], 2.0)


class TestStretchedFace:
    settings = PlannerSettings(fov_h_deg=75.0, fov_v_deg=75.0, safety_m=0.3, max_range_m=3.0,
                               lambda_=0.25, occlusion=True)

    def test_ours_not_worse_than_baseline(self, cube_to_long):
        cube, demo, long = cube_to_long
        started = time.perf_counter()
        results = InspectionPlanner(self.settings).compare(cube, demo, long)
        assert time.perf_counter() - started < 30.0

        ours = results["ours"].report
        baseline = results["baseline"].report
        assert ours.convergence["accepted"] is True
        assert ours.encoding_fidelity >= 0.9
        assert baseline.coverage_percent < 100.0
        assert ours.coverage_percent >= baseline.coverage_percent

    def test_viewpoints_frame_the_stretched_face(self, cube_to_long):
        cube, demo, long = cube_to_long
        result = InspectionPlanner(self.settings).plan(cube, demo, long)
        assert result.accepted
        assert result.report.encoding_fidelity >= 0.9
        assert result.report.flags["framed_viewpoints"] >= 1
        assert_safe(result, long, 0.3)


class TestIdentityTransfer:
    def test_plan_reproduces_demo(self, cube, patch_settings):
        demo = face_trajectory()
        result = InspectionPlanner(patch_settings).plan(cube, demo, cube)
        report = result.report

        assert report.convergence["fitness"] < 1e-9
        assert len(report.segments) == 4
        assert report.encoding_fidelity >= 0.9
        demo_positions = np.array([vp["position"] for vp in report.viewpoints_demo])
        refined = np.array([vp.position for vp in result.viewpoints])
        assert np.allclose(refined, demo_positions, atol=1e-6)
        assert report.coverage_percent == 100.0
        assert report.frechet < 1e-6
        assert_safe(result, cube, 0.2)

    def test_lateral_jitter_encodes_losslessly(self, cube, patch_settings):
        demo = face_trajectory(lateral=(-0.02, 0.02))
        report = InspectionPlanner(patch_settings).plan(cube, demo, cube).report
        assert [(s["start"], s["end"]) for s in report.segments] == [(0, 1), (2, 3), (4, 5), (6, 7)]
        assert report.encoding_fidelity == 1.0


class TestConvergenceGate:
    def test_pole_rejected(self, cube):
        pole = synth_structure(StructureSpec(StructureKind.CYLINDER, (0.1, 4.0), 0.05))
        planner = InspectionPlanner()
        assert not planner.check(cube, pole).accepted

        demo = synth_demo_trajectory("orbit", cube, 1.0, 8)
        result = planner.plan(cube, demo, pole)
        assert not result.accepted
        assert result.trajectory is None

    def test_scaled_cube_accepted(self, cube):
        assert InspectionPlanner().check(cube, cube_cloud(6.0, 0.3)).accepted
