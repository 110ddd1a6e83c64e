"""
Plan Document Generator
=======================
Генерация .docx отчёта о плане инспекции из PlanReport.
"""

import logging
import os
from datetime import datetime
from typing import Optional

from docx import Document
from docx.enum.text import WD_ALIGN_PARAGRAPH
from docx.shared import Pt, RGBColor

from config import config
from services.plan_report import PlanReport

logger = logging.getLogger(__name__)


def _num(value, digits: int = 4) -> str:
    if value is None:
        return "—"
    if isinstance(value, float):
        return f"{value:.{digits}g}"
    return str(value)


class PlanDocumentGenerator:
    """Рендер PlanReport в документ Word"""

    def __init__(self, output_dir: Optional[str] = None):
        self.output_dir = output_dir or config.OUTPUT_DIR
        os.makedirs(self.output_dir, exist_ok=True)

    def generate(self, report: PlanReport, filename: str = "plan_report.docx") -> str:
        """
        Собирает документ: сходимость, сегменты, точки обзора, метрики, флаги.

        Returns:
            Путь к сохранённому файлу
        """
        doc = Document()
        self._apply_styles(doc)
        self._add_header(doc, report)

        self._add_key_value_section(doc, "1. Проверка сходимости", [
            ("Решение", "принято" if report.convergence.get("accepted") else "отклонено"),
            ("Fitness, м²", _num(report.convergence.get("fitness"), 6)),
            ("Порог γ, м²", _num(report.convergence.get("gamma"), 6)),
            ("Масштаб α", ", ".join(_num(a) for a in report.convergence.get("alpha", []))),
            ("Итерации ICP", _num(report.convergence.get("icp_iterations"))),
            ("Точек κ_D / κ_T", f"{_num(report.convergence.get('demo_points'))} / "
                                f"{_num(report.convergence.get('target_points'))}"),
        ])

        if report.segments:
            self._add_table_section(
                doc, "2. Сегменты демонстрации",
                ["#", "Начало", "Конец", "Поз"],
                [[str(i), str(s["start"]), str(s["end"]), str(s["size"])] for i, s in enumerate(report.segments)],
            )

        if report.viewpoints_refined:
            rows = []
            for demo, refined, trace in zip(report.viewpoints_demo, report.viewpoints_refined, report.refinement):
                rows.append([
                    str(refined["segment"]),
                    ", ".join(_num(c, 3) for c in demo["position"]),
                    ", ".join(_num(c, 3) for c in refined["position"]),
                    f"{_num(trace['costs'][0])} → {_num(trace['costs'][-1])}",
                    "да" if trace["clamped"] else "",
                ])
            self._add_table_section(
                doc, "3. Точки обзора",
                ["Сегмент", "Демонстрация, м", "Цель, м", "Невязка", "Сдвиг"],
                rows,
            )

        self._add_key_value_section(doc, "4. Метрики", [
            ("Покрытие, %", _num(report.coverage_percent, 5)),
            ("Покрытие вдоль пути, %", _num(report.dense_coverage_percent, 5)),
            ("Расстояние Фреше", _num(report.frechet, 5)),
            ("Полнота кодирования", _num(report.encoding_fidelity, 5)),
        ])

        active = [name for name, value in report.flags.items() if value]
        if active:
            doc.add_heading("5. Флаги", level=1)
            for name in active:
                item = doc.add_paragraph(style="List Bullet")
                run = item.add_run(f"{name}: {report.flags[name]}")
                run.font.color.rgb = RGBColor(192, 80, 0)

        self._add_generated_note(doc)

        filepath = os.path.join(self.output_dir, filename)
        doc.save(filepath)
        logger.info(f"Отчёт .docx записан: {filepath}")
        return filepath

    def _apply_styles(self, doc: Document):
        """Шрифты основного текста и заголовков разделов"""
        style = doc.styles['Normal']
        style.font.name = 'Arial'
        style.font.size = Pt(10)

        for level, size, color in ((1, 14, RGBColor(0, 51, 102)), (2, 12, RGBColor(0, 76, 153))):
            heading = doc.styles[f'Heading {level}']
            heading.font.name = 'Arial'
            heading.font.bold = True
            heading.font.size = Pt(size)
            heading.font.color.rgb = color

    def _add_header(self, doc: Document, report: PlanReport):
        title = doc.add_heading('ПЛАН ИНСПЕКЦИИ', 0)
        title.alignment = WD_ALIGN_PARAGRAPH.CENTER

        subtitle = doc.add_paragraph()
        subtitle.alignment = WD_ALIGN_PARAGRAPH.CENTER
        run = subtitle.add_run(f"Команда: {report.command}, схема отчёта v{report.version}")
        run.font.size = Pt(10)
        run.font.color.rgb = RGBColor(128, 128, 128)
        doc.add_paragraph()

    def _add_key_value_section(self, doc: Document, title: str, items: list[tuple[str, str]]):
        """Раздел-таблица «параметр — значение»"""
        doc.add_heading(title, level=1)
        table = doc.add_table(rows=0, cols=2)
        table.style = 'Table Grid'
        for key, value in items:
            row = table.add_row()
            row.cells[0].text = key
            row.cells[1].text = value
            row.cells[0].paragraphs[0].runs[0].bold = True
        doc.add_paragraph()

    def _add_table_section(self, doc: Document, title: str, headers: list[str], rows: list[list[str]]):
        doc.add_heading(title, level=1)
        table = doc.add_table(rows=1, cols=len(headers))
        table.style = 'Table Grid'
        for cell, header in zip(table.rows[0].cells, headers):
            cell.text = header
            cell.paragraphs[0].runs[0].bold = True
        for values in rows:
            cells = table.add_row().cells
            for cell, value in zip(cells, values):
                cell.text = value
        doc.add_paragraph()

    def _add_generated_note(self, doc: Document):
        note = doc.add_paragraph()
        note.paragraph_format.space_before = Pt(24)
        note.alignment = WD_ALIGN_PARAGRAPH.RIGHT
        run = note.add_run(f"Сформировано {datetime.now().strftime('%d.%m.%Y %H:%M')}")
        run.font.size = Pt(9)
        run.font.italic = True
        run.font.color.rgb = RGBColor(128, 128, 128)
