"""
Вспомогательные утилиты
=======================
Округление чисел для отчётов, замер времени этапов и работа с путями.
"""

import logging
import math
import os
import time
from contextlib import contextmanager
from typing import Any, Iterator

import numpy as np

from utils.errors import PlannerError, StageError

logger = logging.getLogger(__name__)


def round_significant(value: float, digits: int = 9) -> float:
    """Округляет до digits значащих цифр"""
    if value == 0 or not math.isfinite(value):
        return value
    return float(f"{value:.{digits}g}")


def round_floats(obj: Any, digits: int = 9) -> Any:
    """Рекурсивно округляет float (и массивы numpy) в словарях и списках"""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, (float, np.floating)):
        return round_significant(float(obj), digits)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return round_floats(obj.tolist(), digits)
    if isinstance(obj, dict):
        return {k: round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, digits) for v in obj]
    return obj


class StageTimer:
    """
    Замер времени этапов конвейера.
    Ошибки внутри этапа оборачиваются в StageError с именем этапа.
    """

    def __init__(self):
        self.timings: dict[str, float] = {}

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        started = time.perf_counter()
        logger.info(f"Этап {name}: старт")
        try:
            yield
        except StageError:
            raise
        except (PlannerError, ValueError, np.linalg.LinAlgError) as e:
            logger.error(f"Этап {name} завершился ошибкой: {e}")
            raise StageError(name, e) from e
        finally:
            elapsed = time.perf_counter() - started
            self.timings[name] = self.timings.get(name, 0.0) + elapsed
        logger.info(f"Этап {name}: {elapsed:.3f} с")


def ensure_dir(path: str) -> str:
    """Создаёт каталог (если нужно) и возвращает путь"""
    if path:
        os.makedirs(path, exist_ok=True)
    return path


def format_table(headers: list[str], rows: list[list[Any]]) -> str:
    """Простая текстовая таблица для вывода в консоль"""
    cells = [[str(h) for h in headers]] + [[str(c) for c in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = []
    for n, row in enumerate(cells):
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if n == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)
