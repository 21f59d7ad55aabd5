"""
Формат обмена ячейками: CSV-строки "p,n", по одной ячейке на строку.

Необязательный заголовок "p,n"; строки с '#': комментарии.
"""
import csv
import io
from pathlib import Path
from typing import Union

import structlog

from app.models.metrics import LabeledCells
from app.utils.errors import InputError

logger = structlog.get_logger()

CELLS_HEADER = ("p", "n")


def parse_cells(text: str) -> LabeledCells:
    """
    Разбирает CSV ячеек.

    Raises:
        InputError: Пустой файл, нечисловые или отрицательные счётчики, пустая ячейка
    """
    rows = []
    reader = csv.reader(io.StringIO(text))
    for line_number, row in enumerate(reader, start=1):
        fields = [f.strip() for f in row]
        if not fields or not any(fields) or fields[0].startswith("#"):
            continue
        if tuple(f.lower() for f in fields) == CELLS_HEADER:
            continue
        if len(fields) != 2:
            raise InputError(f"line {line_number}: expected 'p,n', got {len(fields)} fields")
        try:
            p, n = int(fields[0]), int(fields[1])
        except ValueError:
            raise InputError(f"line {line_number}: counts must be integers")
        if p < 0 or n < 0:
            raise InputError(f"line {line_number}: counts must be non-negative")
        if p + n == 0:
            raise InputError(f"line {line_number}: a cell must contain at least one pair")
        rows.append((p, n))
    if not rows:
        raise InputError("Cells file contains no cells")
    logger.debug("Cells parsed", cells=len(rows))
    return LabeledCells.from_pairs(rows)


def read_cells_file(path: Union[str, Path]) -> LabeledCells:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise InputError(f"Cannot read cells file '{path}': {e}")
    return parse_cells(text)


def format_cells(cells: LabeledCells) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CELLS_HEADER)
    writer.writerows(cells.as_tuples())
    return buffer.getvalue()
