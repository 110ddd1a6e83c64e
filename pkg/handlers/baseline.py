"""
Baseline Handler
================
Команда baseline: масштабирование демонстрации по габаритам конструкций.
"""

import logging
from argparse import Namespace

from config import PlannerSettings
from geometry.io import read_cloud, read_trajectory, write_trajectory
from handlers import EXIT_OK, CommandResult
from services.planner import InspectionPlanner

logger = logging.getLogger(__name__)


class BaselineHandler:
    """Обработчик команды baseline"""

    def __init__(self, settings: PlannerSettings):
        self.planner = InspectionPlanner(settings)

    def handle(self, args: Namespace) -> CommandResult:
        demo_cloud = read_cloud(args.demo_cloud)
        demo_trajectory = read_trajectory(args.demo_traj, structure=demo_cloud)
        target_cloud = read_cloud(args.target_cloud)

        trajectory = self.planner.baseline(demo_cloud, demo_trajectory, target_cloud)
        write_trajectory(trajectory, args.out)
        return CommandResult(EXIT_OK, f"baseline: {len(trajectory)} poses -> {args.out}")
