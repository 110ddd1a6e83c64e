"""
Plan Report
===========
Отчёт о запуске конвейера: JSON (схема версии "1") и текстовая сводка.
Числа с плавающей точкой округляются до заданного числа значащих цифр,
поле timings не участвует в сравнении отчётов.
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Optional

from utils.errors import ParseError
from utils.helpers import round_floats

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1"


@dataclass
class PlanReport:
    """Артефакты всех этапов одного запуска"""
    command: str
    convergence: dict = field(default_factory=dict)
    segments: list = field(default_factory=list)
    viewpoints_demo: list = field(default_factory=list)
    viewpoints_initial: list = field(default_factory=list)
    viewpoints_refined: list = field(default_factory=list)
    refinement: list = field(default_factory=list)
    coverage_percent: Optional[float] = None
    frechet: Optional[float] = None
    dense_coverage_percent: Optional[float] = None
    encoding_fidelity: Optional[float] = None
    evaluation: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    version: str = SCHEMA_VERSION

    def to_dict(self, digits: int = 9, include_timings: bool = True) -> dict:
        data = asdict(self)
        if not include_timings:
            data.pop("timings")
        return round_floats(data, digits)

    def to_json(self, digits: int = 9, include_timings: bool = True) -> str:
        return json.dumps(self.to_dict(digits, include_timings), indent=2, ensure_ascii=False)

    @classmethod
    def from_dict(cls, data: dict) -> "PlanReport":
        if str(data.get("version")) != SCHEMA_VERSION:
            raise ParseError(f"Unsupported report version: {data.get('version')!r}")
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ParseError(f"Unknown report keys: {', '.join(sorted(unknown))}")
        return cls(**data)

    def save(self, path: str, digits: int = 9):
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json(digits))
            f.write("\n")
        logger.info(f"Отчёт сохранён: {path}")

    @classmethod
    def load(cls, path: str) -> "PlanReport":
        with open(path, "r", encoding="utf-8") as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise ParseError(f"{path}: invalid JSON: {e}")
        return cls.from_dict(data)

    def to_summary(self) -> str:
        """Короткая текстовая сводка для консоли"""
        lines = [f"[{self.command}]"]
        conv = self.convergence
        if conv:
            verdict = "accepted" if conv.get("accepted") else "rejected"
            lines.append(f"convergence: {verdict}  fitness={_fmt(conv.get('fitness'))}  "
                         f"gamma={_fmt(conv.get('gamma'))}")
        if self.segments:
            lines.append(f"segments: {len(self.segments)}  viewpoints: {len(self.viewpoints_refined)}")
        if self.encoding_fidelity is not None:
            lines.append(f"encoding fidelity: {100 * self.encoding_fidelity:.2f}%")
        if self.coverage_percent is not None:
            lines.append(f"coverage: {self.coverage_percent:.2f}%")
        if self.dense_coverage_percent is not None:
            lines.append(f"dense coverage: {self.dense_coverage_percent:.2f}%")
        if self.frechet is not None:
            lines.append(f"frechet: {_fmt(self.frechet)}")
        active = [name for name, value in self.flags.items() if value]
        if active:
            lines.append(f"flags: {', '.join(active)}")
        return "\n".join(lines)


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)
