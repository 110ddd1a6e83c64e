"""
Inspection Path Transfer - CLI
==============================
Перенос траектории инспекции БПЛА с демонстрационной конструкции
на похожую целевую. Подкоманды: check, plan, eval, baseline, synth, compare.
"""

import argparse
import logging
import sys
from typing import Optional

from config import PlannerSettings, config
from handlers import EXIT_ERROR, EXIT_OK

logger = logging.getLogger(__name__)


def setup_logging(level: Optional[str] = None):
    """Настройка логирования (в stderr, stdout остаётся для результатов)"""
    logging.basicConfig(
        level=getattr(logging, (level or config.LOG_LEVEL).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )


def _add_pair_arguments(parser: argparse.ArgumentParser, with_trajectory: bool = True):
    parser.add_argument("demo_cloud", help="облако демонстрационной конструкции (.ply / .xyz)")
    if with_trajectory:
        parser.add_argument("demo_traj", help="демонстрационная траектория (CSV t,x,y,z[,qw,qx,qy,qz])")
    parser.add_argument("target_cloud", help="облако целевой конструкции (.ply / .xyz)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inspection-path-transfer",
        description="Перенос траектории инспекции между похожими конструкциями",
    )
    parser.add_argument("--settings", help="JSON с параметрами планировщика")
    parser.add_argument("--log-level", help="уровень логирования (DEBUG, INFO, ...)")
    parser.add_argument("--gamma", type=float, help="порог fitness γ, м²")
    parser.add_argument("--lambda", dest="lam", type=float, help="порог перекрытия λ")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="проверка сходимости двух облаков")
    _add_pair_arguments(check, with_trajectory=False)
    check.add_argument("--out", help="сохранить результат в JSON")

    plan = sub.add_parser("plan", help="построить траекторию для целевой конструкции")
    _add_pair_arguments(plan)
    plan.add_argument("--out-dir", help="каталог результатов (по умолчанию PLANNER_OUTPUT_DIR)")
    plan.add_argument("--docx", action="store_true", help="также записать plan_report.docx")

    evaluate = sub.add_parser("eval", help="метрики готовой целевой траектории")
    _add_pair_arguments(evaluate)
    evaluate.add_argument("target_traj", help="целевая траектория (CSV)")
    evaluate.add_argument("--out", help="сохранить отчёт в JSON")

    baseline = sub.add_parser("baseline", help="масштабирование траектории по габаритам")
    _add_pair_arguments(baseline)
    baseline.add_argument("--out", required=True, help="CSV результата")

    compare = sub.add_parser("compare", help="сравнить наш метод и базовый")
    _add_pair_arguments(compare)
    compare.add_argument("--out", help="сохранить оба отчёта в JSON")

    synth = sub.add_parser("synth", help="синтетическая конструкция и демонстрация")
    synth.add_argument("kind", choices=["box", "cuboid", "cylinder", "bridge", "hull"])
    synth.add_argument("--dims", type=float, nargs="+", required=True, help="размеры, м")
    synth.add_argument("--spacing", type=float, required=True, help="шаг выборки точек, м")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--jitter", type=float, default=0.0, help="СКО шума точек, м")
    synth.add_argument("--cloud-out", required=True, help="файл облака (.ply / .xyz)")
    synth.add_argument("--traj-out", help="файл демонстрационной траектории (CSV)")
    synth.add_argument("--pattern", default="orbit", choices=["orbit", "u_path", "figure_eight", "spiral"])
    synth.add_argument("--standoff", type=float,
                       help="удаление от конструкции, м (по умолчанию вдвое больше safety_m)")
    synth.add_argument("--points", type=int, default=16, help="число поз")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    """Точка входа: разбор аргументов, конфигурация, роутинг"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # код 2 argparse совпал бы с отказом проверки сходимости
        return EXIT_OK if e.code in (0, None) else EXIT_ERROR
    setup_logging(args.log_level)

    errors = config.validate()
    if errors:
        for err in errors:
            logger.error(f"Config error: {err}")
            print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR

    from services.router import CommandRouter
    from utils.errors import PlannerError

    try:
        settings = PlannerSettings.load(args.settings)
        settings = settings.with_overrides(gamma=args.gamma, **{"lambda": args.lam})
    except (OSError, ValueError, PlannerError) as e:
        logger.error(f"Settings error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR

    return CommandRouter(settings).route(args)


if __name__ == "__main__":
    sys.exit(main())
