"""
Command Router
==============
Роутер команд — выбирает handler по имени подкоманды, выполняет его
и превращает исключения в коды возврата.
"""

import logging
import sys
from argparse import Namespace
from typing import Callable, Optional, TextIO

from config import PlannerSettings
from handlers import EXIT_ERROR, CommandResult
from handlers.baseline import BaselineHandler
from handlers.check import CheckHandler
from handlers.compare import CompareHandler
from handlers.evaluate import EvaluateHandler
from handlers.plan import PlanHandler
from handlers.synth import SynthHandler
from utils.errors import PlannerError, StageError

logger = logging.getLogger(__name__)

HANDLERS: dict[str, Callable] = {
    "check": CheckHandler,
    "plan": PlanHandler,
    "eval": EvaluateHandler,
    "baseline": BaselineHandler,
    "synth": SynthHandler,
    "compare": CompareHandler,
}


class CommandRouter:
    """
    Роутер команд.
    Успех → 0, отказ проверки сходимости → 2, ошибка ввода-вывода,
    разбора или этапа конвейера → 1 с диагностикой в stderr.
    """

    def __init__(self, settings: PlannerSettings, stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None):
        self.settings = settings
        self.stdout = stdout or sys.stdout
        self.stderr = stderr or sys.stderr

    def route(self, args: Namespace) -> int:
        command = args.command
        handler_cls = HANDLERS.get(command)
        if handler_cls is None:
            self._fail(f"unknown command: {command}")
            return EXIT_ERROR

        logger.info(f"Команда {command}")
        try:
            handler = handler_cls(self.settings)
            result: CommandResult = handler.handle(args)
        except StageError as e:
            self._fail(f"stage '{e.stage}' failed: {e.cause}")
            return EXIT_ERROR
        except (PlannerError, OSError, ValueError) as e:
            self._fail(f"{type(e).__name__}: {e}")
            return EXIT_ERROR

        if result.message:
            print(result.message, file=self.stdout)
        logger.info(f"Команда {command} завершена с кодом {result.exit_code}")
        return result.exit_code

    def _fail(self, message: str):
        logger.error(message)
        print(f"error: {message}", file=self.stderr)
