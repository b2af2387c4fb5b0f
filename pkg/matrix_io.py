# -*- coding: utf-8 -*-
"""
导入导出模块 - Matrix Market 矩阵文件、JSON 报告、CSV 基准记录

输出逐字节确定：排序固定，实数统一用 17 位有效数字（可无损往返）。
"""

import contextlib
import csv
import json
import logging
from typing import Any, Dict, Iterable, List, Optional, Sequence

from config import BENCH_CSV_HEADER, MM_BANNER, MM_SIG_DIGITS, REPORT_KEYS
from closed_form import LogDetReport
from model import SparseSymMatrix

logger = logging.getLogger('RepDet.IO')


class MatrixMarketError(ValueError):
    """Matrix Market 文件格式错误"""


def format_real(value: float) -> str:
    """17 位有效数字，float → 文本 → float 无损"""
    return format(float(value), f'.{MM_SIG_DIGITS}g')


def _open_text(destination, mode: str):
    """路径则打开文件，已打开的流则原样使用（不关闭）"""
    if hasattr(destination, 'write') or hasattr(destination, 'read'):
        return contextlib.nullcontext(destination)
    return open(destination, mode, encoding='utf-8', newline='')


# Matrix Market

def matrix_market_lines(m: SparseSymMatrix, comments: Sequence[str] = ()) -> List[str]:
    """生成文件各行：横幅、注释、尺寸行、按 (col, row) 排序的下三角记录"""
    lines = [MM_BANNER]
    lines.extend(f"% {c}" for c in comments)
    lines.append(f"{m.dim} {m.dim} {m.nnz_stored}")
    # 存储的上三角 (r, c) 即下三角 (c, r)；存储顺序 (r, c) 正是下三角的 (col, row) 顺序
    for r, c, v in zip(m.rows, m.cols, m.values):
        lines.append(f"{int(c) + 1} {int(r) + 1} {format_real(v)}")
    return lines


def export_matrix_market(m: SparseSymMatrix, destination, comments: Sequence[str] = ()) -> None:
    """写出 coordinate / real / symmetric 格式"""
    with _open_text(destination, 'w') as f:
        for line in matrix_market_lines(m, comments):
            f.write(line + '\n')
    logger.info(f"Matrix Market 已写入 {destination}: dim = {m.dim}, 记录 = {m.nnz_stored}")


def import_matrix_market(source) -> SparseSymMatrix:
    """读取 coordinate / real / symmetric 文件；横幅不符（pattern、complex 等）即报错"""
    with _open_text(source, 'r') as f:
        lines = [line.rstrip('\r\n') for line in f]

    if not lines or lines[0].strip() != MM_BANNER:
        got = lines[0] if lines else '<空文件>'
        raise MatrixMarketError(f"不支持的横幅: {got!r}")

    body = [line for line in lines[1:] if line.strip() and not line.lstrip().startswith('%')]
    if not body:
        raise MatrixMarketError("缺少尺寸行")

    try:
        rows_n, cols_n, nnz = (int(t) for t in body[0].split())
    except ValueError:
        raise MatrixMarketError(f"尺寸行格式错误: {body[0]!r}") from None
    if rows_n != cols_n or rows_n < 1:
        raise MatrixMarketError(f"对称矩阵必须是方阵: {rows_n} × {cols_n}")
    if len(body) - 1 != nnz:
        raise MatrixMarketError(f"记录数 {len(body) - 1} 与声明的 {nnz} 不一致")

    entries = []
    for k, line in enumerate(body[1:], start=1):
        parts = line.split()
        if len(parts) != 3:
            raise MatrixMarketError(f"第 {k} 条记录格式错误: {line!r}")
        try:
            row, col, value = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise MatrixMarketError(f"第 {k} 条记录无法解析: {line!r}") from None
        if not (1 <= col <= row <= rows_n):
            raise MatrixMarketError(f"第 {k} 条记录不在下三角或越界: {line!r}")
        entries.append((row - 1, col - 1, value))

    try:
        return SparseSymMatrix.from_entries(rows_n, entries)
    except ValueError as e:
        raise MatrixMarketError(str(e)) from None


# JSON 报告

def report_to_json(r: LogDetReport) -> str:
    data = r.to_dict()
    ordered = {key: data[key] for key in REPORT_KEYS}
    return json.dumps(ordered, indent=2, ensure_ascii=False, allow_nan=False)


def write_report_json(r: LogDetReport, destination) -> None:
    """单个 JSON 对象，键恰为 REPORT_KEYS，数值为十进制字面量"""
    text = report_to_json(r)
    with _open_text(destination, 'w') as f:
        f.write(text + '\n')
    logger.debug(f"报告已写入 {destination}")


def read_report_json(source) -> LogDetReport:
    with _open_text(source, 'r') as f:
        data = json.load(f)
    if set(data) != set(REPORT_KEYS):
        raise ValueError(f"报告字段不符: {sorted(data)}")
    return LogDetReport.from_dict(data)


# CSV 基准记录

def _csv_cell(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, float):
        return format_real(value)
    return str(value)


def write_bench_csv(records: Iterable[Any], destination) -> None:
    """每个记录需提供 as_row() → dict；跳过的 oracle 字段写为空"""
    with _open_text(destination, 'w') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(BENCH_CSV_HEADER)
        for record in records:
            row: Dict[str, Any] = record.as_row()
            writer.writerow([_csv_cell(row[key]) for key in BENCH_CSV_HEADER])


def read_bench_csv(source) -> List[Dict[str, Optional[str]]]:
    with _open_text(source, 'r') as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != BENCH_CSV_HEADER:
            raise ValueError(f"CSV 表头不符: {reader.fieldnames}")
        return [{k: (v if v != '' else None) for k, v in row.items()} for row in reader]
