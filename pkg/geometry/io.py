"""
File Formats
============
Чтение и запись облаков точек (ASCII PLY, XYZ) и траекторий (CSV).
Парсеры отвергают NaN/Inf и сообщают номер строки в ParseError.
"""

import csv
import logging
import math
import os
from typing import Optional

import numpy as np

from geometry.core import PointCloud
from geometry.trajectory import Trajectory, aim_at_structure
from utils.errors import ParseError

logger = logging.getLogger(__name__)

TRAJECTORY_HEADER = ["t", "x", "y", "z", "qw", "qx", "qy", "qz"]
POSITION_HEADER = ["t", "x", "y", "z"]


def _parse_float(token: str, path: str, line_no: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"{path}:{line_no}: not a number: {token!r}")
    if not math.isfinite(value):
        raise ParseError(f"{path}:{line_no}: non-finite value {token!r}")
    return value


def _format_float(value: float) -> str:
    """Кратчайшее точное представление (чтение даёт то же число)"""
    return repr(float(value))


# ==================== ОБЛАКА ТОЧЕК ====================

def read_ply(path: str) -> PointCloud:
    """
    Читает ASCII PLY: элемент vertex со свойствами x, y, z
    (остальные свойства и элементы пропускаются).
    """
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()

    if not lines or lines[0].strip() != "ply":
        raise ParseError(f"{path}: missing 'ply' magic")

    vertex_count = None
    properties: list[str] = []
    elements: list[tuple[str, int]] = []
    current = None
    header_end = None

    for line_no, raw in enumerate(lines[1:], start=2):
        tokens = raw.split()
        if not tokens or tokens[0] == "comment" or tokens[0] == "obj_info":
            continue
        if tokens[0] == "format":
            if len(tokens) < 2 or tokens[1] != "ascii":
                raise ParseError(f"{path}:{line_no}: only ASCII PLY is supported")
        elif tokens[0] == "element":
            if len(tokens) != 3:
                raise ParseError(f"{path}:{line_no}: malformed element line")
            current = tokens[1]
            count = int(_parse_float(tokens[2], path, line_no))
            elements.append((current, count))
            if current == "vertex":
                vertex_count = count
        elif tokens[0] == "property":
            if current == "vertex":
                properties.append(tokens[-1])
        elif tokens[0] == "end_header":
            header_end = line_no
            break

    if header_end is None:
        raise ParseError(f"{path}: missing end_header")
    if vertex_count is None:
        raise ParseError(f"{path}: no vertex element")
    try:
        columns = [properties.index(axis) for axis in ("x", "y", "z")]
    except ValueError:
        raise ParseError(f"{path}: vertex element lacks x/y/z properties")

    # вершины идут после элементов, объявленных раньше них
    skip = 0
    for name, count in elements:
        if name == "vertex":
            break
        skip += count

    body = [ln for ln in lines[header_end:] if ln.strip()]
    if len(body) < skip + vertex_count:
        raise ParseError(f"{path}: expected {vertex_count} vertices, found {len(body) - skip}")

    points = np.empty((vertex_count, 3))
    for i in range(vertex_count):
        line_no = header_end + skip + i + 1
        tokens = body[skip + i].split()
        if len(tokens) < len(properties):
            raise ParseError(f"{path}:{line_no}: expected {len(properties)} values")
        points[i] = [_parse_float(tokens[c], path, line_no) for c in columns]

    logger.info(f"Прочитано облако {path}: {vertex_count} точек")
    return PointCloud(points, label=os.path.basename(path))


def write_ply(cloud: PointCloud, path: str):
    """Записывает облако как ASCII PLY (только x y z)"""
    with open(path, "w", encoding="utf-8") as f:
        f.write("ply\n")
        f.write("format ascii 1.0\n")
        f.write(f"element vertex {len(cloud)}\n")
        f.write("property double x\n")
        f.write("property double y\n")
        f.write("property double z\n")
        f.write("end_header\n")
        for p in cloud.points:
            f.write(" ".join(_format_float(v) for v in p) + "\n")
    logger.info(f"Записано облако {path}: {len(cloud)} точек")


def read_xyz(path: str) -> PointCloud:
    """Текст «x y z» по точке на строку; пустые строки и '#' пропускаются"""
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            tokens = raw.replace(",", " ").split()
            if not tokens or tokens[0].startswith("#"):
                continue
            if len(tokens) < 3:
                raise ParseError(f"{path}:{line_no}: expected 3 coordinates")
            rows.append([_parse_float(t, path, line_no) for t in tokens[:3]])
    logger.info(f"Прочитано облако {path}: {len(rows)} точек")
    return PointCloud(np.array(rows).reshape(-1, 3), label=os.path.basename(path))


def write_xyz(cloud: PointCloud, path: str):
    with open(path, "w", encoding="utf-8") as f:
        for p in cloud.points:
            f.write(" ".join(_format_float(v) for v in p) + "\n")
    logger.info(f"Записано облако {path}: {len(cloud)} точек")


def read_cloud(path: str) -> PointCloud:
    """Формат по расширению: .ply или текстовый XYZ"""
    if path.lower().endswith(".ply"):
        return read_ply(path)
    return read_xyz(path)


def write_cloud(cloud: PointCloud, path: str):
    if path.lower().endswith(".ply"):
        write_ply(cloud, path)
    else:
        write_xyz(cloud, path)


# ==================== ТРАЕКТОРИИ ====================

def read_trajectory(path: str, structure: Optional[PointCloud] = None) -> Trajectory:
    """
    Читает CSV траектории с заголовком t,x,y,z,qw,qx,qy,qz.

    Файлы без кватернионов (t,x,y,z) допускаются: каждая поза
    направляется на ближайшую точку structure, а у траектории
    выставляется orientation_fallback.
    """
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        fields = [name.strip() for name in (reader.fieldnames or [])]
        if not set(POSITION_HEADER) <= set(fields):
            raise ParseError(f"{path}: header must contain {','.join(POSITION_HEADER)}")
        has_orientation = set(TRAJECTORY_HEADER) <= set(fields)

        times, positions, orientations = [], [], []
        for line_no, row in enumerate(reader, start=2):
            row = {k.strip(): v for k, v in row.items() if k is not None}
            times.append(_parse_float(row["t"], path, line_no))
            positions.append([_parse_float(row[k], path, line_no) for k in ("x", "y", "z")])
            if has_orientation:
                orientations.append([_parse_float(row[k], path, line_no) for k in ("qw", "qx", "qy", "qz")])

    positions = np.array(positions).reshape(-1, 3)
    fallback = False
    if not has_orientation:
        if structure is None:
            raise ParseError(f"{path}: no orientation columns and no structure to aim at")
        orientations = aim_at_structure(positions, structure)
        fallback = True
        logger.warning(f"{path}: нет ориентаций, позы направлены на ближайшие точки конструкции")

    trajectory = Trajectory(
        times=np.array(times),
        positions=positions,
        orientations=np.array(orientations).reshape(-1, 4),
        label=os.path.basename(path),
        orientation_fallback=fallback,
    )
    logger.info(f"Прочитана траектория {path}: {len(trajectory)} поз")
    return trajectory


def write_trajectory(trajectory: Trajectory, path: str):
    """Пишет CSV t,x,y,z,qw,qx,qy,qz с точным представлением чисел"""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TRAJECTORY_HEADER)
        for t, p, q in zip(trajectory.times, trajectory.positions, trajectory.orientations):
            writer.writerow([_format_float(v) for v in (t, *p, *q)])
    logger.info(f"Записана траектория {path}: {len(trajectory)} поз")
