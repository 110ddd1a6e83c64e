"""
Evaluate Handler
================
Команда eval: покрытие и расстояние Фреше для готовой целевой траектории
(результата plan, базового метода или внешнего источника).
"""

import logging
from argparse import Namespace

from config import PlannerSettings, config
from geometry.io import read_cloud, read_trajectory
from handlers import EXIT_OK, CommandResult
from services.planner import InspectionPlanner

logger = logging.getLogger(__name__)


class EvaluateHandler:
    """Обработчик команды eval"""

    def __init__(self, settings: PlannerSettings):
        self.planner = InspectionPlanner(settings)

    def handle(self, args: Namespace) -> CommandResult:
        demo_cloud = read_cloud(args.demo_cloud)
        demo_trajectory = read_trajectory(args.demo_traj, structure=demo_cloud)
        target_cloud = read_cloud(args.target_cloud)
        target_trajectory = read_trajectory(args.target_traj, structure=target_cloud)

        result = self.planner.evaluate(demo_cloud, demo_trajectory, target_cloud, target_trajectory)
        if getattr(args, "out", None):
            result.report.save(args.out, config.float_digits())

        return CommandResult(EXIT_OK, result.report.to_summary())
