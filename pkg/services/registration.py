"""
Registration
============
Проверка сходимости: неравномерная нормализация масштаба, общий воксельный
фильтр, ICP с оценкой fitness и сравнение с порогом γ. Затем для каждой точки
демонстрационного облака ищется ближайшая точка выровненного целевого облака.

ICP выравнивает масштабированное целевое облако в систему демонстрации.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from geometry.core import (
    STD_FLOOR,
    Aabb,
    NnIndex,
    PointCloud,
    RigidTransform,
    compute_aabb,
    default_voxel_size,
    sampling_spacing,
    voxel_downsample,
)
from utils.errors import DegenerateGeometryError, EmptyInputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScaleFactors:
    """Покоординатные множители α (безразмерные, > 0)"""
    alpha: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=np.float64).reshape(3)
        if not np.all(np.isfinite(alpha)) or np.any(alpha <= 0):
            raise DegenerateGeometryError(f"Invalid scale factors {alpha}")
        object.__setattr__(self, "alpha", alpha)

    def inverted(self) -> "ScaleFactors":
        return ScaleFactors(1.0 / self.alpha)

    def to_list(self) -> list[float]:
        return self.alpha.tolist()


@dataclass
class IcpResult:
    """Результат ICP: преобразование целевого облака в систему исходного"""
    transform: RigidTransform
    fitness: float
    iterations_run: int
    fitness_history: list[float] = field(default_factory=list)


@dataclass(frozen=True, eq=False)
class CorrespondenceMap:
    """
    Карта соответствий κ_D → κ_T: target_indices[k] — индекс ближайшей
    точки целевого облака для k-й точки демонстрации. Отображение
    «многие к одному», по одной паре на каждую точку κ_D.
    """
    target_indices: np.ndarray
    distances: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "target_indices", np.asarray(self.target_indices, dtype=np.int64).reshape(-1))
        object.__setattr__(self, "distances", np.asarray(self.distances, dtype=np.float64).reshape(-1))

    def __len__(self) -> int:
        return self.target_indices.size

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return [(k, int(j)) for k, j in enumerate(self.target_indices)]

    def map_indices(self, demo_indices) -> np.ndarray:
        """Образ набора индексов демонстрации (с повторами)"""
        return self.target_indices[np.asarray(demo_indices, dtype=np.int64)]


@dataclass
class ConvergenceDecision:
    """
    Решение проверки сходимости и все промежуточные облака.

    target_cloud лежит в системе цели; aligned_target = transform(scale(target_cloud))
    с масштабированием относительно scale_center, индексы точек совпадают.
    """
    accepted: bool
    fitness: float
    gamma: float
    scale: ScaleFactors
    scale_center: np.ndarray
    transform: RigidTransform
    demo_voxel_size: float
    target_voxel_size: float
    sampling_size: float
    demo_cloud: PointCloud
    target_cloud: PointCloud
    aligned_target: PointCloud
    iterations_run: int = 0

    def to_demo_frame(self, points) -> np.ndarray:
        """Точки системы цели в системе демонстрации"""
        scaled = (np.asarray(points, dtype=np.float64) - self.scale_center) * self.scale.alpha + self.scale_center
        return self.transform.apply(scaled)

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "fitness": self.fitness,
            "gamma": self.gamma,
            "alpha": self.scale.to_list(),
            "scale_center": self.scale_center.tolist(),
            "transform": self.transform.as_matrix().tolist(),
            "demo_voxel_size": self.demo_voxel_size,
            "target_voxel_size": self.target_voxel_size,
            "sampling_size": self.sampling_size,
            "demo_points": len(self.demo_cloud),
            "target_points": len(self.target_cloud),
            "icp_iterations": self.iterations_run,
        }


# ==================== МАСШТАБ ====================

def scale_factors(demo_bbox: Aabb, target_bbox: Aabb) -> ScaleFactors:
    """α = габариты демонстрации / габариты цели (вырожденные оси с полом)"""
    ratio = demo_bbox.floored_extent(STD_FLOOR) / target_bbox.floored_extent(STD_FLOOR)
    if not np.all(np.isfinite(ratio)) or np.any(ratio <= 0):
        raise DegenerateGeometryError(f"Cannot derive scale factors from extents "
                                      f"{demo_bbox.extent} / {target_bbox.extent}")
    return ScaleFactors(ratio)


def apply_scale(cloud: PointCloud, scale: ScaleFactors, center: Optional[np.ndarray] = None) -> PointCloud:
    """Покоординатное масштабирование относительно center (по умолчанию центр рамки облака)"""
    center = compute_aabb(cloud).center if center is None else np.asarray(center, dtype=np.float64)
    return PointCloud((cloud.points - center) * scale.alpha + center, cloud.label)


# ==================== ICP ====================

def _check_non_collinear(cloud: PointCloud, name: str):
    if len(cloud) < 3:
        raise DegenerateGeometryError(f"{name} cloud needs at least 3 points, got {len(cloud)}")
    centered = cloud.points - cloud.points.mean(axis=0)
    try:
        s = np.linalg.svd(centered, compute_uv=False)
    except np.linalg.LinAlgError as e:
        raise DegenerateGeometryError(f"SVD failed on {name} cloud: {e}")
    if s[0] <= 0 or s[1] <= 1e-12 * s[0]:
        raise DegenerateGeometryError(f"{name} cloud is collinear")


def best_fit_transform(source: np.ndarray, destination: np.ndarray) -> RigidTransform:
    """
    Жёсткое преобразование, минимизирующее Σ‖R·source + t − destination‖²
    (метод Кабша через SVD, с исправлением отражения).
    """
    src_center = source.mean(axis=0)
    dst_center = destination.mean(axis=0)
    h = (source - src_center).T @ (destination - dst_center)
    try:
        u, _, vt = np.linalg.svd(h)
    except np.linalg.LinAlgError as e:
        raise DegenerateGeometryError(f"SVD failed in rigid update: {e}")

    rotation = vt.T @ u.T
    if np.linalg.det(rotation) < 0:
        vt[-1, :] *= -1
        rotation = vt.T @ u.T
    translation = dst_center - rotation @ src_center
    return RigidTransform(rotation, translation)


def icp_align(
    source: PointCloud,
    target: PointCloud,
    max_iterations: int = 60,
    tolerance: float = 1e-8,
    initial: Optional[RigidTransform] = None,
) -> IcpResult:
    """
    Точка-в-точку ICP: ищет преобразование T, переводящее target на source.

    fitness — средний квадрат расстояния от каждой точки source до ближайшей
    точки T(target). История fitness не возрастает: шаг, ухудшающий fitness,
    отвергается и итерации прекращаются.
    """
    _check_non_collinear(source, "source")
    _check_non_collinear(target, "target")

    index = NnIndex(target)

    def match(transform: RigidTransform) -> tuple[np.ndarray, float]:
        # поиск в системе target: расстояния сохраняются жёстким преобразованием
        indices, distances = index.nearest_many(transform.inverse().apply(source.points))
        return indices, float(np.mean(distances ** 2))

    if initial is None:
        initial = RigidTransform(np.eye(3), source.centroid() - target.centroid())

    transform = initial
    indices, fitness = match(transform)
    history = [fitness]
    iterations = 0

    for iteration in range(max_iterations):
        iterations = iteration + 1
        candidate = best_fit_transform(target.points[indices], source.points)
        candidate_indices, candidate_fitness = match(candidate)

        if candidate_fitness > fitness:
            logger.debug(f"ICP: шаг {iterations} отвергнут ({candidate_fitness:.3e} > {fitness:.3e})")
            break

        improvement = fitness - candidate_fitness
        transform, indices, fitness = candidate, candidate_indices, candidate_fitness
        history.append(fitness)
        logger.debug(f"ICP iteration {iterations}: fitness={fitness:.6e}")

        if improvement < tolerance:
            break

    logger.info(f"ICP завершён за {iterations} итераций, fitness={fitness:.6e}")
    return IcpResult(transform, fitness, iterations, history)


# ==================== ПРОВЕРКА СХОДИМОСТИ ====================

def convergence_check(
    demo_cloud: PointCloud,
    target_cloud: PointCloud,
    gamma: Optional[float] = None,
    *,
    voxel_size: Optional[float] = None,
    voxel_divisor: float = 50.0,
    gamma_factor: float = 0.25,
    max_iterations: int = 60,
    tolerance: float = 1e-8,
) -> ConvergenceDecision:
    """
    Нормализация масштаба → общий воксельный фильтр → ICP.

    Цель масштабируется в рамку демонстрации, затем оба облака фильтруются
    одним вокселем в системе демонстрации. accepted ⟺ fitness < γ.

    Args:
        gamma: явный порог; по умолчанию gamma_factor · h², где h — больший
            из вокселя и шагов дискретизации обоих отфильтрованных облаков
        voxel_size: воксель в системе демонстрации (по умолчанию диагональ / voxel_divisor)

    Returns:
        ConvergenceDecision; target_cloud в системе цели, по индексам
        совпадает с aligned_target.
    """
    if demo_cloud.is_empty() or target_cloud.is_empty():
        raise EmptyInputError("Convergence check needs two non-empty clouds")

    demo_box = compute_aabb(demo_cloud)
    target_box = compute_aabb(target_cloud)
    scale = scale_factors(demo_box, target_box)
    centering = RigidTransform(translation=demo_box.center - target_box.center)

    # рамка цели совпадает с рамкой демонстрации по размеру и положению
    normalized = apply_scale(target_cloud, scale, target_box.center).transformed(centering)

    voxel = voxel_size or default_voxel_size(demo_cloud, voxel_divisor)
    kappa_demo = voxel_downsample(demo_cloud, voxel)
    kappa_normalized = voxel_downsample(normalized, voxel)
    kappa_target = apply_scale(kappa_normalized.transformed(centering.inverse()), scale.inverted(),
                               target_box.center)
    logger.info(f"Воксельный фильтр {voxel:.4g} м: demo {len(demo_cloud)} -> {len(kappa_demo)}, "
                f"target {len(target_cloud)} -> {len(kappa_target)}")

    icp = icp_align(kappa_demo, kappa_normalized, max_iterations, tolerance, initial=RigidTransform.identity())
    aligned = kappa_normalized.transformed(icp.transform)

    # разреженное облако даёт ненулевой fitness даже для одинаковой формы
    sampling = max(voxel, sampling_spacing(kappa_demo), sampling_spacing(kappa_normalized))
    threshold = gamma if gamma is not None else gamma_factor * sampling ** 2
    accepted = icp.fitness < threshold
    logger.info(f"Сходимость: fitness={icp.fitness:.6e}, γ={threshold:.6e} (шаг {sampling:.4g} м) -> "
                f"{'принято' if accepted else 'отклонено'}")

    return ConvergenceDecision(
        accepted=accepted,
        fitness=icp.fitness,
        gamma=threshold,
        scale=scale,
        scale_center=target_box.center,
        transform=icp.transform.compose(centering),
        demo_voxel_size=voxel,
        target_voxel_size=float(np.max(voxel / scale.alpha)),
        sampling_size=sampling,
        demo_cloud=kappa_demo,
        target_cloud=kappa_target,
        aligned_target=aligned,
        iterations_run=icp.iterations_run,
    )


def estimate_correspondences(demo_cloud: PointCloud, aligned_target: PointCloud) -> CorrespondenceMap:
    """Ближайшая точка выровненного целевого облака для каждой точки κ_D"""
    if demo_cloud.is_empty() or aligned_target.is_empty():
        raise EmptyInputError("Correspondences need two non-empty clouds")
    indices, distances = NnIndex(aligned_target).nearest_many(demo_cloud.points)
    logger.info(f"Соответствия: {len(indices)} пар, "
                f"{np.unique(indices).size} различных целевых точек")
    return CorrespondenceMap(indices, distances)
