"""CSV emission and re-parsing of result tables."""
import csv
import io
import sys
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from crsnomalab.core import logger
from crsnomalab.core.config import APP_NAME, VERSION


@dataclass(frozen=True)
class CsvTable:
    comment: str
    columns: Tuple[str, ...]
    rows: List[Dict[str, object]]


def header_comment(seed) -> str:
    return f"# {APP_NAME} v{VERSION}, seed={seed}"


def format_cell(value) -> str:
    if value is None:
        return ''
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return format(value, '.17g')
    return str(value)


def parse_cell(text: str):
    if text == '':
        return None
    if text in ('true', 'false'):
        return text == 'true'
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def render_csv(columns: Sequence[str], rows: Sequence[Sequence], seed) -> str:
    buffer = io.StringIO()
    buffer.write(header_comment(seed) + '\n')
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(value) for value in row])
    return buffer.getvalue()


def write_csv(path: Optional[str], columns: Sequence[str], rows: Sequence[Sequence], seed) -> None:
    """Writes the table to `path`, or to stdout when `path` is None or '-'."""
    text = render_csv(columns, rows, seed)
    if path in (None, '-'):
        sys.stdout.write(text)
        return
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        handle.write(text)
    logger.info(f"[CSV] Wrote {len(rows)} rows to {path}")


def read_csv(path: str) -> CsvTable:
    with open(path, encoding='utf-8', newline='') as handle:
        comment = handle.readline().rstrip('\n')
        reader = csv.reader(handle)
        columns = tuple(next(reader))
        rows = [dict(zip(columns, (parse_cell(cell) for cell in record))) for record in reader if record]
    return CsvTable(comment=comment, columns=columns, rows=rows)
