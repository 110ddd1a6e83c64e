"""
Inspection Planner
==================
Оркестрация конвейера: проверка сходимости → соответствия → видимость
демонстрации → сегменты и точки обзора → перенос → уточнение → сборка
траектории → метрики. Этапы выполняются последовательно, ошибка этапа
поднимается как StageError с его именем.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from config import PlannerSettings
from geometry.core import NnIndex, PointCloud, axis_stats, compute_aabb
from geometry.trajectory import Trajectory
from services.demo_encoding import (
    InspectionViewpoint,
    LambdaMode,
    Segment,
    VisibilitySource,
    encoding_fidelity,
    extract_viewpoints,
    segment_trajectory,
)
from services.metrics import Evaluation, evaluate_plan
from services.plan_report import PlanReport
from services.refinement import GaussNewtonConfig, RefinementTrace, assemble_trajectory, refine_viewpoint
from services.registration import (
    ConvergenceDecision,
    CorrespondenceMap,
    convergence_check,
    estimate_correspondences,
)
from services.transfer import baseline_scale_trajectory, transfer_viewpoints
from services.visibility import CameraModel, OccupancyGrid, VisibilitySet, trajectory_visibility
from utils.errors import InvalidParameterError
from utils.helpers import StageTimer

logger = logging.getLogger(__name__)


@dataclass
class PlanContext:
    """Общие для plan/eval/compare результаты: решение, соответствия, видимость демонстрации"""
    decision: ConvergenceDecision
    correspondences: CorrespondenceMap
    per_pose: list[VisibilitySet]
    demo_total: VisibilitySet
    demo_occupancy: Optional[OccupancyGrid] = None
    target_occupancy: Optional[OccupancyGrid] = None


@dataclass
class PlanResult:
    """Отчёт и (если построена) целевая траектория"""
    report: PlanReport
    trajectory: Optional[Trajectory] = None
    viewpoints: list[InspectionViewpoint] = field(default_factory=list)
    traces: list[RefinementTrace] = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return bool(self.report.convergence.get("accepted"))


class InspectionPlanner:
    """Перенос траектории инспекции с демонстрационной конструкции на целевую"""

    def __init__(self, settings: Optional[PlannerSettings] = None):
        self.settings = settings or PlannerSettings()
        errors = self.settings.validate()
        if errors:
            raise InvalidParameterError("; ".join(errors))
        self.camera = CameraModel(
            fov_horizontal=self.settings.fov_h_deg,
            fov_vertical=self.settings.fov_v_deg,
            safety_distance=self.settings.safety_m,
            max_view_distance=self.settings.max_range_m,
        )
        self.gn_config = GaussNewtonConfig(**self.settings.gn)

    # ==================== ЭТАПЫ ====================

    def check(self, demo_cloud: PointCloud, target_cloud: PointCloud) -> ConvergenceDecision:
        s = self.settings
        return convergence_check(
            demo_cloud,
            target_cloud,
            s.gamma,
            voxel_size=s.voxel_size_m,
            voxel_divisor=s.voxel_divisor,
            gamma_factor=s.gamma_factor,
            max_iterations=s.icp_max_iters,
            tolerance=s.icp_tolerance,
        )

    def _prepare(self, demo_cloud: PointCloud, demo_trajectory: Trajectory,
                 target_cloud: PointCloud, timer: StageTimer) -> PlanContext:
        with timer.stage("convergence"):
            decision = self.check(demo_cloud, target_cloud)
        return self._continue_prepare(decision, demo_trajectory, timer)

    def _continue_prepare(self, decision: ConvergenceDecision, demo_trajectory: Trajectory,
                          timer: StageTimer) -> PlanContext:
        with timer.stage("correspondences"):
            correspondences = estimate_correspondences(decision.demo_cloud, decision.aligned_target)
        with timer.stage("visibility"):
            demo_occupancy = target_occupancy = None
            if self.settings.occlusion:
                demo_occupancy = OccupancyGrid(decision.demo_cloud, decision.demo_voxel_size)
                target_occupancy = OccupancyGrid(decision.target_cloud, decision.target_voxel_size)
            per_pose, demo_total = trajectory_visibility(
                demo_trajectory, self.camera, decision.demo_cloud, self.settings.occlusion, demo_occupancy
            )
        return PlanContext(decision, correspondences, per_pose, demo_total, demo_occupancy, target_occupancy)

    def _is_planar(self, demo_trajectory: Trajectory) -> bool:
        mode = self.settings.planar
        if mode == "on":
            return True
        if mode == "off":
            return False
        return bool(np.ptp(demo_trajectory.positions[:, 2]) < 1e-9)

    def _evaluate(self, context: PlanContext, demo_trajectory: Trajectory,
                  target_trajectory: Trajectory, timer: StageTimer) -> Evaluation:
        with timer.stage("evaluation"):
            return evaluate_plan(
                context.demo_total,
                context.correspondences,
                demo_trajectory,
                target_trajectory,
                context.decision.target_cloud,
                self.camera,
                occlusion=self.settings.occlusion,
                occupancy=context.target_occupancy,
                dense_step=self.settings.dense_step_m if self.settings.dense_coverage else None,
            )

    def _new_report(self, command: str, context: Optional[PlanContext] = None) -> PlanReport:
        report = PlanReport(command=command, params=self.settings.to_dict())
        report.params["camera"] = self.camera.to_dict()
        if context is not None:
            report.convergence = context.decision.to_dict()
            report.convergence["correspondences"] = len(context.correspondences)
            report.convergence["demo_visible"] = len(context.demo_total)
        return report

    @staticmethod
    def _fill_metrics(report: PlanReport, evaluation: Evaluation):
        report.coverage_percent = evaluation.coverage_percent
        report.frechet = evaluation.frechet
        report.dense_coverage_percent = evaluation.dense_coverage_percent
        report.evaluation = evaluation.to_dict()

    # ==================== КОМАНДЫ ====================

    def plan(self, demo_cloud: PointCloud, demo_trajectory: Trajectory,
             target_cloud: PointCloud) -> PlanResult:
        """Полный конвейер; при отказе проверки сходимости траектория не строится"""
        demo_trajectory.require_nonempty()
        timer = StageTimer()
        with timer.stage("convergence"):
            decision = self.check(demo_cloud, target_cloud)
        if not decision.accepted:
            report = self._new_report("plan")
            report.convergence = decision.to_dict()
            report.timings = dict(timer.timings)
            logger.warning("Конструкции не похожи, новая траектория не строится")
            return PlanResult(report)

        context = self._continue_prepare(decision, demo_trajectory, timer)
        return self._plan_with_context(context, demo_trajectory, target_cloud, timer)

    def _plan_with_context(self, context: PlanContext, demo_trajectory: Trajectory,
                           target_cloud: PointCloud, timer: StageTimer) -> PlanResult:
        s = self.settings
        decision = context.decision
        kappa_demo, kappa_target = decision.demo_cloud, decision.target_cloud

        with timer.stage("segmentation"):
            segments: list[Segment] = segment_trajectory(
                context.per_pose, context.demo_total, s.lambda_, LambdaMode(s.lambda_mode)
            )
        with timer.stage("viewpoints"):
            demo_viewpoints = extract_viewpoints(
                segments, demo_trajectory, self.camera, kappa_demo, context.per_pose,
                occlusion=s.occlusion, occupancy=context.demo_occupancy,
                visibility_source=VisibilitySource(s.visibility_source),
            )
            fidelity = encoding_fidelity(demo_viewpoints, context.demo_total)
        with timer.stage("transfer"):
            stats_demo = axis_stats(kappa_demo)
            stats_target = axis_stats(kappa_target)
            initial = transfer_viewpoints(demo_viewpoints, stats_demo, stats_target, context.correspondences)

        planar = self._is_planar(demo_trajectory)
        if planar:
            logger.info("Плоский режим: шаги уточнения только по горизонтали")
        with timer.stage("refinement"):
            clearance = NnIndex(target_cloud)
            refined, traces = [], []
            for init, demo_vp in zip(initial, demo_viewpoints):
                viewpoint, trace = refine_viewpoint(
                    init, demo_vp, context.correspondences, kappa_demo, kappa_target,
                    stats_demo, stats_target, self.gn_config,
                    safety_distance=s.safety_m, planar=planar, clearance_index=clearance,
                    camera=self.camera if s.frame_footprint else None,
                )
                refined.append(viewpoint)
                traces.append(trace)
        with timer.stage("assembly"):
            trajectory = assemble_trajectory(refined, demo_trajectory, demo_viewpoints, label="target")

        evaluation = self._evaluate(context, demo_trajectory, trajectory, timer)

        report = self._new_report("plan", context)
        report.segments = [seg.to_dict() for seg in segments]
        report.viewpoints_demo = [vp.to_dict() for vp in demo_viewpoints]
        report.viewpoints_initial = [vp.to_dict() for vp in initial]
        report.viewpoints_refined = [vp.to_dict() for vp in refined]
        report.refinement = [trace.to_dict() for trace in traces]
        report.encoding_fidelity = fidelity
        self._fill_metrics(report, evaluation)
        report.flags = {
            "planar": planar,
            "orientation_fallback": demo_trajectory.orientation_fallback,
            "occlusion": s.occlusion,
            "clamped_viewpoints": sum(1 for t in traces if t.clamped),
            "framed_viewpoints": sum(1 for t in traces if t.backoff > 0),
            "blind_viewpoints": len(evaluation.blind_poses),
        }
        report.timings = dict(timer.timings)
        logger.info(f"План готов: {len(refined)} точек обзора, покрытие {evaluation.coverage_percent:.2f}%")
        return PlanResult(report, trajectory, refined, traces)

    def evaluate(self, demo_cloud: PointCloud, demo_trajectory: Trajectory,
                 target_cloud: PointCloud, target_trajectory: Trajectory,
                 command: str = "eval") -> PlanResult:
        """Покрытие и расстояние Фреше для произвольной целевой траектории"""
        timer = StageTimer()
        context = self._prepare(demo_cloud, demo_trajectory, target_cloud, timer)
        if not context.decision.accepted:
            logger.warning("Проверка сходимости не пройдена, метрики носят справочный характер")
        evaluation = self._evaluate(context, demo_trajectory, target_trajectory, timer)

        report = self._new_report(command, context)
        self._fill_metrics(report, evaluation)
        report.flags = {
            "orientation_fallback": demo_trajectory.orientation_fallback or target_trajectory.orientation_fallback,
            "occlusion": self.settings.occlusion,
            "blind_viewpoints": len(evaluation.blind_poses),
        }
        report.timings = dict(timer.timings)
        return PlanResult(report, target_trajectory)

    def baseline(self, demo_cloud: PointCloud, demo_trajectory: Trajectory,
                 target_cloud: PointCloud) -> Trajectory:
        """Масштабирование демонстрации по габаритам конструкций"""
        demo_trajectory.require_nonempty()
        trajectory = baseline_scale_trajectory(demo_trajectory, compute_aabb(demo_cloud), compute_aabb(target_cloud))
        trajectory.label = "baseline"
        return trajectory

    def compare(self, demo_cloud: PointCloud, demo_trajectory: Trajectory,
                target_cloud: PointCloud) -> dict[str, PlanResult]:
        """Наш метод и базовый на одних входных данных"""
        timer = StageTimer()
        with timer.stage("convergence"):
            decision = self.check(demo_cloud, target_cloud)
        context = self._continue_prepare(decision, demo_trajectory, timer)

        results = {}
        if decision.accepted:
            results["ours"] = self._plan_with_context(context, demo_trajectory, target_cloud, timer)
        else:
            logger.warning("Проверка сходимости не пройдена, сравнивается только базовый метод")

        baseline = self.baseline(demo_cloud, demo_trajectory, target_cloud)
        baseline_timer = StageTimer()
        evaluation = self._evaluate(context, demo_trajectory, baseline, baseline_timer)
        report = self._new_report("baseline", context)
        self._fill_metrics(report, evaluation)
        report.timings = dict(baseline_timer.timings)
        results["baseline"] = PlanResult(report, baseline)
        return results
