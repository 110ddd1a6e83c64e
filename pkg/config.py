"""
Централизованная конфигурация приложения
=========================================
Процессные настройки (окружение, .env) и параметры планировщика (JSON).
"""

import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

from dotenv import load_dotenv

from utils.errors import InvalidParameterError

load_dotenv()

logger = logging.getLogger(__name__)


class Config:
    """Конфигурация процесса"""

    # === Logging ===
    LOG_LEVEL: str = os.getenv("PLANNER_LOG_LEVEL", "INFO").upper()

    # === Paths ===
    OUTPUT_DIR: str = os.getenv("PLANNER_OUTPUT_DIR", "./output")
    # Файл параметров по умолчанию (пусто: встроенные значения)
    SETTINGS_PATH: str = os.getenv("PLANNER_SETTINGS", "")

    # === Reports ===
    REPORT_DOCX: bool = os.getenv("PLANNER_REPORT_DOCX", "0").strip().lower() in ("1", "true", "yes")
    # Знаков после запятой в JSON-отчётах, разбирается в validate()
    FLOAT_DIGITS: str = os.getenv("PLANNER_FLOAT_DIGITS", "9").strip()

    @classmethod
    def validate(cls) -> list[str]:
        """Проверяет настройки, возвращает список ошибок"""
        errors = []
        if cls.LOG_LEVEL not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            errors.append(f"PLANNER_LOG_LEVEL неизвестен: {cls.LOG_LEVEL}")
        try:
            digits = int(cls.FLOAT_DIGITS)
        except ValueError:
            errors.append(f"PLANNER_FLOAT_DIGITS не целое число: {cls.FLOAT_DIGITS!r}")
        else:
            if not 1 <= digits <= 17:
                errors.append(f"PLANNER_FLOAT_DIGITS вне диапазона 1..17: {digits}")
        if cls.SETTINGS_PATH and not os.path.isfile(cls.SETTINGS_PATH):
            errors.append(f"PLANNER_SETTINGS не найден: {cls.SETTINGS_PATH}")
        return errors

    @classmethod
    def float_digits(cls) -> int:
        return int(cls.FLOAT_DIGITS)


def _default_gn() -> dict:
    return {
        "max_iterations": 50,
        "step_tolerance": 1e-6,
        "initial_step": 1.0,
        "max_halvings": 8,
        "condition_limit": 1e12,
    }


@dataclass
class PlannerSettings:
    """
    Параметры конвейера. Ключи JSON совпадают с именами полей,
    кроме lambda_ (в файле — "lambda").
    """
    voxel_size_m: Optional[float] = None
    voxel_divisor: float = 50.0
    gamma: Optional[float] = None
    gamma_factor: float = 0.25
    lambda_: float = 0.05
    lambda_mode: str = "frac_of_total"
    fov_h_deg: float = 75.0
    fov_v_deg: float = 75.0
    safety_m: float = 2.0
    max_range_m: float = 50.0
    icp_max_iters: int = 60
    icp_tolerance: float = 1e-8
    gn: dict = field(default_factory=_default_gn)
    occlusion: bool = False
    visibility_source: str = "centroid"
    planar: str = "auto"
    frame_footprint: bool = True
    dense_coverage: bool = False
    dense_step_m: float = 0.25
    speed_mps: float = 1.0

    @staticmethod
    def _field_name(key: str) -> str:
        return "lambda_" if key == "lambda" else key

    @classmethod
    def from_dict(cls, data: dict) -> "PlannerSettings":
        known = {f.name for f in fields(cls)}
        unknown = [k for k in data if cls._field_name(k) not in known]
        if unknown:
            raise InvalidParameterError(f"Unknown settings keys: {', '.join(sorted(unknown))}")

        values = {cls._field_name(k): v for k, v in data.items()}
        if "gn" in values:
            gn = _default_gn()
            gn.update(values["gn"] or {})
            values["gn"] = gn
        return cls(**values)

    @classmethod
    def load(cls, path: Optional[str] = None) -> "PlannerSettings":
        """Читает JSON поверх значений по умолчанию"""
        path = path or Config.SETTINGS_PATH
        if not path:
            return cls()
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        logger.info(f"Загружены параметры из {path}")
        return cls.from_dict(data)

    def with_overrides(self, **overrides) -> "PlannerSettings":
        """Копия с заменой полей (значения None игнорируются)"""
        data = self.to_dict()
        data.update({k: v for k, v in overrides.items() if v is not None})
        return PlannerSettings.from_dict(data)

    def validate(self) -> list[str]:
        """Проверяет диапазоны значений, возвращает список ошибок"""
        errors = []
        if self.voxel_size_m is not None and not self.voxel_size_m > 0:
            errors.append(f"voxel_size_m должен быть > 0: {self.voxel_size_m}")
        if not self.voxel_divisor > 0:
            errors.append(f"voxel_divisor должен быть > 0: {self.voxel_divisor}")
        if self.gamma is not None and not self.gamma > 0:
            errors.append(f"gamma должна быть > 0: {self.gamma}")
        if not self.gamma_factor > 0:
            errors.append(f"gamma_factor должен быть > 0: {self.gamma_factor}")
        if self.lambda_mode not in ("absolute", "frac_of_total", "frac_of_start"):
            errors.append(f"lambda_mode неизвестен: {self.lambda_mode}")
        elif self.lambda_mode == "absolute":
            if not self.lambda_ > 0 or float(self.lambda_) != int(self.lambda_):
                errors.append(f"lambda в режиме absolute — целое > 0: {self.lambda_}")
        elif not 0 < self.lambda_ <= 1:
            errors.append(f"lambda должна быть в (0, 1]: {self.lambda_}")
        for name in ("fov_h_deg", "fov_v_deg"):
            value = getattr(self, name)
            if not 0 < value <= 180:
                errors.append(f"{name} должен быть в (0, 180]: {value}")
        if not 0 <= self.safety_m < self.max_range_m:
            errors.append(f"нужно 0 <= safety_m < max_range_m: {self.safety_m} / {self.max_range_m}")
        if self.icp_max_iters < 1:
            errors.append(f"icp_max_iters должен быть >= 1: {self.icp_max_iters}")
        if not self.icp_tolerance > 0:
            errors.append(f"icp_tolerance должен быть > 0: {self.icp_tolerance}")
        unknown_gn = set(self.gn) - set(_default_gn())
        if unknown_gn:
            errors.append(f"неизвестные ключи gn: {', '.join(sorted(unknown_gn))}")
        for key, value in self.gn.items():
            if not isinstance(value, (int, float)) or not value > 0:
                errors.append(f"gn.{key} должен быть > 0: {value}")
        if self.visibility_source not in ("centroid", "union"):
            errors.append(f"visibility_source неизвестен: {self.visibility_source}")
        if self.planar not in ("auto", "on", "off"):
            errors.append(f"planar должен быть auto/on/off: {self.planar}")
        if not self.dense_step_m > 0:
            errors.append(f"dense_step_m должен быть > 0: {self.dense_step_m}")
        if not self.speed_mps > 0:
            errors.append(f"speed_mps должен быть > 0: {self.speed_mps}")
        return errors

    def to_dict(self) -> dict:
        data = asdict(self)
        data["lambda"] = data.pop("lambda_")
        return data


# Синглтон для удобного импорта
config = Config()
