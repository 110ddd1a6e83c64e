"""
Compare Handler
===============
Команда compare: наш метод и базовый на одних входных данных,
по строке на метод (покрытие %, расстояние Фреше).
"""

import json
import logging
from argparse import Namespace

from config import PlannerSettings, config
from geometry.io import read_cloud, read_trajectory
from handlers import EXIT_OK, EXIT_REJECTED, CommandResult
from services.planner import InspectionPlanner
from utils.helpers import format_table

logger = logging.getLogger(__name__)


class CompareHandler:
    """Обработчик команды compare"""

    def __init__(self, settings: PlannerSettings):
        self.planner = InspectionPlanner(settings)

    def handle(self, args: Namespace) -> CommandResult:
        demo_cloud = read_cloud(args.demo_cloud)
        demo_trajectory = read_trajectory(args.demo_traj, structure=demo_cloud)
        target_cloud = read_cloud(args.target_cloud)

        results = self.planner.compare(demo_cloud, demo_trajectory, target_cloud)
        rows = []
        for method, result in results.items():
            report = result.report
            rows.append([method, f"{report.coverage_percent:.2f}", f"{report.frechet:.4f}", len(result.trajectory)])

        if getattr(args, "out", None):
            payload = {method: r.report.to_dict(config.float_digits()) for method, r in results.items()}
            with open(args.out, "w", encoding="utf-8") as f:
                json.dump(payload, f, indent=2, ensure_ascii=False)
            logger.info(f"Сравнение сохранено: {args.out}")

        table = format_table(["method", "coverage_%", "frechet", "poses"], rows)
        exit_code = EXIT_OK if "ours" in results else EXIT_REJECTED
        return CommandResult(exit_code, table)
