"""
Исключения планировщика
=======================
Единая иерархия ошибок: все модули бросают наследников PlannerError,
роутер команд превращает их в коды возврата.
"""

from typing import Optional


class PlannerError(Exception):
    """Базовое исключение для ошибок планировщика"""
    pass


class EmptyInputError(PlannerError):
    """Пустое облако точек или пустая траектория"""
    pass


class InvalidParameterError(PlannerError):
    """Параметр вне допустимого диапазона"""
    pass


class InsufficientDataError(PlannerError):
    """Недостаточно точек для статистики"""
    pass


class DegenerateGeometryError(PlannerError):
    """Вырожденная геометрия (нулевые габариты, коллинеарные точки, сбой SVD)"""
    pass


class ViewpointBlindError(PlannerError):
    """Точка обзора в центроиде сегмента не видит ни одной точки"""

    def __init__(self, segment_index: int, message: Optional[str] = None):
        self.segment_index = segment_index
        super().__init__(
            message or f"Viewpoint of segment {segment_index} sees no surface points"
        )


class DegenerateResidualError(PlannerError):
    """Вырожденная система нормальных уравнений Гаусса-Ньютона"""
    pass


class UnresolvedTimingError(PlannerError):
    """Невозможно восстановить скорость демонстрации"""
    pass


class UndefinedMetricError(PlannerError):
    """Метрика не определена (например, пустое множество видимости)"""
    pass


class ParseError(PlannerError):
    """Ошибка разбора входного файла"""
    pass


class StageError(PlannerError):
    """Ошибка конкретного этапа конвейера"""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")
