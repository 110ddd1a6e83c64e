"""
Synth Handler
=============
Команда synth: синтетическая конструкция (PLY/XYZ) и, по желанию,
демонстрационная траектория вокруг неё (CSV).
"""

import logging
from argparse import Namespace
from typing import Optional

from config import PlannerSettings
from geometry.io import write_cloud, write_trajectory
from handlers import EXIT_OK, CommandResult
from services.scenes import StructureSpec, synth_demo_trajectory, synth_structure
from utils.errors import InvalidParameterError

logger = logging.getLogger(__name__)


class SynthHandler:
    """Обработчик команды synth"""

    def __init__(self, settings: PlannerSettings):
        self.settings = settings

    def _standoff(self, requested: Optional[float]) -> float:
        """Удаление демонстрации: не ближе safety_m, по умолчанию 2 × safety_m"""
        safety = self.settings.safety_m
        if requested is None:
            return 2.0 * safety if safety > 0 else 1.0
        if requested < safety:
            raise InvalidParameterError(f"standoff {requested} m is closer than safety_m {safety} m")
        return requested

    def handle(self, args: Namespace) -> CommandResult:
        spec = StructureSpec(
            kind=args.kind,
            dimensions=tuple(args.dims),
            sample_spacing=args.spacing,
            seed=args.seed,
            jitter=args.jitter,
        )
        cloud = synth_structure(spec)
        write_cloud(cloud, args.cloud_out)
        lines = [f"structure: {cloud.label}, {len(cloud)} points -> {args.cloud_out}"]

        if args.traj_out:
            standoff = self._standoff(args.standoff)
            trajectory = synth_demo_trajectory(
                args.pattern, cloud, standoff, args.points, speed=self.settings.speed_mps,
            )
            write_trajectory(trajectory, args.traj_out)
            lines.append(f"trajectory: {trajectory.label}, {len(trajectory)} poses -> {args.traj_out}")

        return CommandResult(EXIT_OK, "\n".join(lines))
