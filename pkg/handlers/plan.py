"""
Plan Handler
============
Команда plan: полный конвейер переноса траектории.
Пишет target_trajectory.csv и plan_report.json (и .docx по запросу).
"""

import logging
import os
from argparse import Namespace

from config import PlannerSettings, config
from geometry.io import read_cloud, read_trajectory, write_trajectory
from handlers import EXIT_OK, EXIT_REJECTED, CommandResult
from services.planner import InspectionPlanner
from services.report_document import PlanDocumentGenerator
from utils.helpers import ensure_dir

logger = logging.getLogger(__name__)

TRAJECTORY_FILE = "target_trajectory.csv"
REPORT_FILE = "plan_report.json"
DOCUMENT_FILE = "plan_report.docx"


class PlanHandler:
    """Обработчик команды plan"""

    def __init__(self, settings: PlannerSettings):
        self.planner = InspectionPlanner(settings)

    def handle(self, args: Namespace) -> CommandResult:
        demo_cloud = read_cloud(args.demo_cloud)
        demo_trajectory = read_trajectory(args.demo_traj, structure=demo_cloud)
        target_cloud = read_cloud(args.target_cloud)
        out_dir = ensure_dir(args.out_dir or config.OUTPUT_DIR)

        result = self.planner.plan(demo_cloud, demo_trajectory, target_cloud)
        result.report.save(os.path.join(out_dir, REPORT_FILE), config.float_digits())

        if not result.accepted:
            return CommandResult(EXIT_REJECTED, result.report.to_summary())

        write_trajectory(result.trajectory, os.path.join(out_dir, TRAJECTORY_FILE))
        if getattr(args, "docx", False) or config.REPORT_DOCX:
            PlanDocumentGenerator(out_dir).generate(result.report, DOCUMENT_FILE)

        logger.info(f"Результаты записаны в {out_dir}")
        return CommandResult(EXIT_OK, result.report.to_summary())
