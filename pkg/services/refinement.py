"""
Refinement
==========
Уточнение позиций целевых точек обзора методом Гаусса-Ньютона
и сборка итоговой траектории с таймингом демонстрации.

Невязка для точки k: r_k = ‖x − q_k‖ − ‖p_D − p_k‖, где p_k — видимые
точки демонстрации, q_k — соответствующие им точки цели, p_D — позиция
точки обзора демонстрации. Все величины в стандартизованных координатах.

При разных СКО осей демонстрации и цели минимум невязки не гарантирует,
что камера охватит соответствующий участок, поэтому после уточнения
точка обзора отводится от участка, пока он не попадёт в пирамиду видимости.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from geometry.core import AxisStats, NnIndex, PointCloud, destandardize, standardize
from geometry.trajectory import Pose, Trajectory, orientation_from_forward
from services.demo_encoding import InspectionViewpoint
from services.registration import CorrespondenceMap
from services.visibility import CameraModel, visible_points
from utils.errors import (
    DegenerateResidualError,
    EmptyInputError,
    InvalidParameterError,
    UnresolvedTimingError,
)

logger = logging.getLogger(__name__)

# защита от деления на ноль, когда x совпадает с точкой поверхности
_DISTANCE_EPS = 1e-12
_FALLBACK_DIRECTION = np.array([1.0, 0.0, 0.0])

_PLANAR_MASK = np.array([True, True, False])
_FULL_MASK = np.array([True, True, True])


@dataclass(frozen=True)
class GaussNewtonConfig:
    """Параметры затухающего метода Гаусса-Ньютона"""
    max_iterations: int = 50
    step_tolerance: float = 1e-6
    initial_step: float = 1.0
    max_halvings: int = 8
    condition_limit: float = 1e12

    def __post_init__(self):
        for name in ("max_iterations", "step_tolerance", "initial_step", "max_halvings", "condition_limit"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"Gauss-Newton {name} must be positive, got {getattr(self, name)}")


@dataclass
class RefinementTrace:
    """История оптимизации одной точки обзора"""
    costs: list[float] = field(default_factory=list)
    step_norms: list[float] = field(default_factory=list)
    steepest_descent_steps: int = 0
    clamped: bool = False
    backoff: float = 0.0
    clearance_before: Optional[float] = None
    final_position: list[float] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.step_norms)

    @property
    def initial_cost(self) -> float:
        return self.costs[0]

    @property
    def final_cost(self) -> float:
        return self.costs[-1]

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "costs": self.costs,
            "step_norms": self.step_norms,
            "steepest_descent_steps": self.steepest_descent_steps,
            "clamped": self.clamped,
            "backoff": self.backoff,
            "clearance_before": self.clearance_before,
            "final_position": self.final_position,
        }


def residuals_and_jacobian(x, anchors: np.ndarray, demo_distances: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Невязки r_k = ‖x − q_k‖ − d_k и якобиан (строка k = (x − q_k)/‖x − q_k‖).
    """
    diff = np.asarray(x, dtype=np.float64).reshape(1, 3) - anchors
    norms = np.linalg.norm(diff, axis=1)
    residuals = norms - demo_distances
    safe = norms >= _DISTANCE_EPS
    jacobian = np.empty_like(diff)
    jacobian[safe] = diff[safe] / norms[safe, None]
    jacobian[~safe] = _FALLBACK_DIRECTION
    return residuals, jacobian


def _solve_step(jacobian: np.ndarray, residuals: np.ndarray, mask: np.ndarray,
                cfg: GaussNewtonConfig) -> tuple[np.ndarray, bool]:
    """Шаг Гаусса-Ньютона по активным осям; при плохой обусловленности — антиградиент"""
    active = jacobian[:, mask]
    normal = active.T @ active
    gradient = active.T @ residuals
    step = np.zeros(3)

    condition = np.linalg.cond(normal)
    if not np.isfinite(condition) or condition > cfg.condition_limit:
        step[mask] = -gradient
        return step, True
    try:
        step[mask] = -np.linalg.solve(normal, gradient)
    except np.linalg.LinAlgError:
        step[mask] = -gradient
        return step, True
    return step, False


def _check_degenerate(demo_points: np.ndarray, target_points: np.ndarray):
    # все соответствия стянуты в одну точку при различных точках демонстрации
    if target_points.shape[0] < 2:
        return
    if np.all(np.ptp(target_points, axis=0) == 0) and np.any(np.ptp(demo_points, axis=0) > 0):
        raise DegenerateResidualError(
            f"All {target_points.shape[0]} corresponded target points coincide"
        )


def gauss_newton(x0: np.ndarray, anchors: np.ndarray, demo_distances: np.ndarray,
                 cfg: GaussNewtonConfig, planar: bool = False) -> tuple[np.ndarray, RefinementTrace]:
    """Затухающий Гаусс-Ньютон с делением шага пополам; стоимость строго убывает"""
    mask = _PLANAR_MASK if planar else _FULL_MASK
    x = np.asarray(x0, dtype=np.float64).reshape(3).copy()
    residuals, jacobian = residuals_and_jacobian(x, anchors, demo_distances)
    cost = float(residuals @ residuals)
    trace = RefinementTrace(costs=[cost])

    for iteration in range(cfg.max_iterations):
        if cost == 0.0:
            break
        step, steepest = _solve_step(jacobian, residuals, mask, cfg)

        scale = cfg.initial_step
        accepted = None
        for _ in range(cfg.max_halvings + 1):
            candidate = x + scale * step
            cand_res, cand_jac = residuals_and_jacobian(candidate, anchors, demo_distances)
            cand_cost = float(cand_res @ cand_res)
            if cand_cost < cost:
                accepted = (candidate, cand_res, cand_jac, cand_cost)
                break
            scale /= 2.0

        if accepted is None:
            logger.debug(f"GN: итерация {iteration + 1} без улучшения, остановка")
            break

        step_norm = float(np.linalg.norm(scale * step))
        x, residuals, jacobian, cost = accepted
        trace.costs.append(cost)
        trace.step_norms.append(step_norm)
        trace.steepest_descent_steps += int(steepest)
        logger.debug(f"GN iteration {iteration + 1}: cost={cost:.6e}, step={step_norm:.3e}")

        if step_norm < cfg.step_tolerance:
            break

    return x, trace


def clamp_to_safety(position: np.ndarray, index: NnIndex, safety: float,
                    planar: bool = False, max_pushes: int = 50) -> tuple[np.ndarray, bool]:
    """
    Выталкивает позицию от ближайшей точки поверхности на безопасную дистанцию.
    В плоском режиме двигается только по горизонтали.
    """
    position = np.asarray(position, dtype=np.float64).copy()
    if safety <= 0:
        return position, False

    goal = safety * (1.0 + 1e-9)
    points = index.cloud.points
    mask = _PLANAR_MASK if planar else _FULL_MASK
    moved = False

    for _ in range(max_pushes):
        nearest, distance = index.nearest(position)
        if distance >= safety:
            return position, moved
        anchor = points[nearest]
        direction = np.where(mask, position - anchor, 0.0)
        if np.linalg.norm(direction) < 1e-12:
            direction = np.where(mask, position - points.mean(axis=0), 0.0)
        if np.linalg.norm(direction) < 1e-12:
            direction = np.where(mask, _FALLBACK_DIRECTION, 0.0)
        direction /= np.linalg.norm(direction)

        # по горизонтали добираем недостающее с учётом фиксированного dz
        vertical = 0.0 if not planar else float(position[2] - anchor[2])
        reach = np.sqrt(max(goal ** 2 - vertical ** 2, 0.0))
        position = np.where(mask, anchor + direction * reach, position)
        moved = True

    # запасной вариант: уходим от центра конструкции
    center = points.mean(axis=0)
    outward = np.where(mask, position - center, 0.0)
    if np.linalg.norm(outward) < 1e-12:
        outward = np.where(mask, _FALLBACK_DIRECTION, 0.0)
    outward /= np.linalg.norm(outward)
    for _ in range(100_000):
        if index.nearest(position)[1] >= safety:
            break
        position = position + outward * safety / 4.0
    logger.warning(f"Безопасная дистанция достигнута отходом от центра: {position.tolist()}")
    return position, True


def frame_footprint(position: np.ndarray, focus: np.ndarray, footprint: np.ndarray, camera: CameraModel,
                    planar: bool = False, samples: int = 64, bisections: int = 30) -> tuple[np.ndarray, float]:
    """
    Отводит точку обзора от focus, пока камера, направленная на focus,
    не увидит наибольшую часть footprint.

    Args:
        position: позиция после уточнения (мир цели)
        focus: центр соответствующего участка цели
        footprint: точки участка, которые должна видеть камера
        camera: модель камеры; отвод не дальше max_view_distance
        planar: отводить только по горизонтали

    Returns:
        Новая позиция и величина отвода, м (0, если участок уже виден целиком).
    """
    position = np.asarray(position, dtype=np.float64).copy()
    outward = position - np.asarray(focus, dtype=np.float64)
    if planar:
        outward[2] = 0.0
    norm = np.linalg.norm(outward)
    if norm < 1e-12:
        return position, 0.0
    outward /= norm
    cloud = PointCloud(footprint)

    def seen(backoff: float) -> int:
        candidate = position + backoff * outward
        direction = focus - candidate
        if np.linalg.norm(direction) < 1e-12:
            return 0
        return len(visible_points(Pose(candidate, orientation_from_forward(direction)), camera, cloud))

    best_count = seen(0.0)
    if best_count == len(cloud):
        return position, 0.0

    step = camera.max_view_distance / samples
    best, previous = 0.0, 0.0
    for i in range(1, samples + 1):
        count = seen(i * step)
        if count > best_count:
            best_count, best, previous = count, i * step, (i - 1) * step
        if best_count == len(cloud):
            break
    if best == 0.0:
        return position, 0.0

    # наименьший отвод с тем же числом видимых точек
    low, high = previous, best
    for _ in range(bisections):
        middle = (low + high) / 2.0
        if seen(middle) >= best_count:
            high = middle
        else:
            low = middle
    logger.debug(f"Отвод {high:.3f} м: видно {best_count} из {len(cloud)} точек участка")
    return position + high * outward, high


def refine_viewpoint(
    init: InspectionViewpoint,
    demo_viewpoint: InspectionViewpoint,
    correspondences: CorrespondenceMap,
    demo_cloud: PointCloud,
    target_cloud: PointCloud,
    stats_demo: AxisStats,
    stats_target: AxisStats,
    cfg: Optional[GaussNewtonConfig] = None,
    *,
    safety_distance: float = 0.0,
    planar: bool = False,
    clearance_index: Optional[NnIndex] = None,
    camera: Optional[CameraModel] = None,
) -> tuple[InspectionViewpoint, RefinementTrace]:
    """
    Минимизирует Σ_k (‖x − q_k‖ − ‖p_D − p_k‖)² по позиции x в
    стандартизованной системе цели, затем возвращает результат в мир.

    Если задана camera, точка обзора отводится от участка цели, пока он не
    попадёт в пирамиду видимости (frame_footprint). Затем применяется
    безопасная дистанция (по clearance_index, иначе по target_cloud), и камера
    поворачивается на центр соответствующих точек.
    """
    cfg = cfg or GaussNewtonConfig()
    demo_indices = demo_viewpoint.visibility.indices
    if demo_indices.size == 0:
        raise EmptyInputError(f"Demo viewpoint {demo_viewpoint.source_segment} has empty visibility")
    if demo_indices.max() >= len(correspondences):
        raise InvalidParameterError("Viewpoint visibility references points without correspondences")

    target_indices = correspondences.map_indices(demo_indices)
    demo_points = demo_cloud.points[demo_indices]
    target_points = target_cloud.points[target_indices]
    _check_degenerate(demo_points, target_points)

    p_k = standardize(demo_points, stats_demo)
    p_d = standardize(demo_viewpoint.position, stats_demo)[0]
    demo_distances = np.linalg.norm(p_d - p_k, axis=1)
    anchors = standardize(target_points, stats_target)

    x0 = standardize(init.position, stats_target)[0]
    x, trace = gauss_newton(x0, anchors, demo_distances, cfg, planar)
    position = destandardize(x, stats_target)[0]
    if planar:
        position[2] = init.position[2]

    footprint = target_cloud.points[np.unique(target_indices)]
    focus = footprint.mean(axis=0)
    if camera is not None:
        position, trace.backoff = frame_footprint(position, focus, footprint, camera, planar)
        if trace.backoff > 0:
            logger.info(f"Точка обзора {init.source_segment}: отведена на {trace.backoff:.3f} м, "
                        f"чтобы охватить участок из {len(footprint)} точек")

    index = clearance_index or NnIndex(target_cloud)
    trace.clearance_before = index.nearest(position)[1]
    position, trace.clamped = clamp_to_safety(position, index, safety_distance, planar)
    if trace.clamped:
        logger.info(f"Точка обзора {init.source_segment}: отодвинута до безопасной дистанции "
                    f"(было {trace.clearance_before:.3f} м)")

    direction = focus - position
    if np.linalg.norm(direction) > 1e-12:
        pose = Pose(position, orientation_from_forward(direction))
    else:
        pose = init.pose.with_position(position)

    trace.final_position = position.tolist()
    logger.debug(f"Точка обзора {init.source_segment}: cost {trace.initial_cost:.4e} -> "
                 f"{trace.final_cost:.4e} за {trace.iterations} итераций")
    return init.with_pose(pose), trace


def assemble_trajectory(
    refined_viewpoints: list[InspectionViewpoint],
    demo_trajectory: Trajectory,
    demo_viewpoints: list[InspectionViewpoint],
    label: str = "target",
) -> Trajectory:
    """
    Итоговая траектория: позы уточнённых точек обзора, время участка
    j → j+1 = длина участка / скорость демонстрации между теми же точками обзора.
    """
    if len(refined_viewpoints) != len(demo_viewpoints):
        raise InvalidParameterError(
            f"{len(refined_viewpoints)} refined viewpoints for {len(demo_viewpoints)} demo viewpoints"
        )
    if not refined_viewpoints:
        raise EmptyInputError("No viewpoints to assemble")

    times = [0.0]
    if len(refined_viewpoints) > 1:
        demo_trajectory.require_nonempty()
        mid_times = np.array([vp.mid_time for vp in demo_viewpoints])
        arc = np.interp(mid_times, demo_trajectory.times, demo_trajectory.cumulative_length())
        global_speed = demo_trajectory.average_speed()

        for j in range(len(refined_viewpoints) - 1):
            elapsed = mid_times[j + 1] - mid_times[j]
            travelled = arc[j + 1] - arc[j]
            if elapsed > 0 and travelled > 0:
                speed = travelled / elapsed
            else:
                if not global_speed > 0:
                    raise UnresolvedTimingError(f"Leg {j} has no demo speed and the demo average speed is zero")
                logger.warning(f"Участок {j}: нулевая скорость демонстрации, берётся средняя {global_speed:.3f} м/с")
                speed = global_speed
            leg = float(np.linalg.norm(refined_viewpoints[j + 1].position - refined_viewpoints[j].position))
            times.append(times[-1] + leg / speed)

    trajectory = Trajectory.from_poses([vp.pose for vp in refined_viewpoints], times, label=label)
    logger.info(f"Собрана траектория: {len(trajectory)} точек, {trajectory.duration:.2f} с, "
                f"{trajectory.path_length():.2f} м")
    return trajectory
