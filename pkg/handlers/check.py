"""
Check Handler
=============
Команда check: проверка сходимости двух облаков.
Код 0 — конструкции похожи, 2 — отклонено.
"""

import json
import logging
from argparse import Namespace

from config import PlannerSettings
from geometry.io import read_cloud
from handlers import EXIT_OK, EXIT_REJECTED, CommandResult
from services.planner import InspectionPlanner
from utils.helpers import round_floats

logger = logging.getLogger(__name__)


class CheckHandler:
    """Обработчик команды check"""

    def __init__(self, settings: PlannerSettings):
        self.planner = InspectionPlanner(settings)

    def handle(self, args: Namespace) -> CommandResult:
        demo = read_cloud(args.demo_cloud)
        target = read_cloud(args.target_cloud)
        decision = self.planner.check(demo, target)

        fragment = round_floats(decision.to_dict())
        if getattr(args, "out", None):
            with open(args.out, "w", encoding="utf-8") as f:
                json.dump({"convergence": fragment}, f, indent=2)
            logger.info(f"Результат проверки сохранён: {args.out}")

        message = (
            f"fitness={decision.fitness:.6g} gamma={decision.gamma:.6g} "
            f"accepted={'yes' if decision.accepted else 'no'}"
        )
        return CommandResult(EXIT_OK if decision.accepted else EXIT_REJECTED, message)
