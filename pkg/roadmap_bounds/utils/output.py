"""
Output
CSV/JSON writers with fixed columns and 6-significant-digit floats, plus rich
summary tables for the terminal.
"""

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Type, TypeVar, Union

from loguru import logger
from pydantic import BaseModel, ValidationError
from rich.console import Console
from rich.table import Table

# Summaries go to stderr so stdout stays machine-readable.
console = Console(stderr=True)

ModelT = TypeVar("ModelT", bound=BaseModel)


def format_value(value: Any) -> str:
    """CSV cell text: floats to 6 significant digits, None as empty"""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.6g}"
    return str(value)


def to_csv(rows: Iterable[Mapping[str, Any]], columns: Sequence[str]) -> str:
    """Render rows under a fixed header; missing keys become empty cells"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(col)) for col in columns])
    return buffer.getvalue()


def to_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=False, default=_json_default) + "\n"


def _json_default(value: Any) -> Any:
    if hasattr(value, "model_dump"):
        return value.model_dump()
    if hasattr(value, "tolist"):
        return value.tolist()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def emit(text: str, out: Optional[Union[str, Path]] = None) -> None:
    """Write text to out, or to stdout when out is None"""
    if out is None:
        print(text, end="")
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    logger.info(f"✓ Results written to {path}")


def print_summary(title: str, rows: List[Dict[str, Any]], columns: Optional[Sequence[str]] = None) -> None:
    """Rich table of rows on stderr"""
    if not rows:
        return
    columns = list(columns or rows[0].keys())
    table = Table(title=title, show_lines=False)
    for col in columns:
        table.add_column(col, justify="right")
    for row in rows:
        table.add_row(*[format_value(row.get(col)) for col in columns])
    console.print(table)


def load_spec(path: Union[str, Path], model: Type[ModelT]) -> ModelT:
    """
    Parse a JSON spec file into model.

    Raises:
        ValueError: On JSON syntax errors (with line and column) or validation
            errors (with the dotted field path of each problem)
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ValueError(f"Cannot read spec file {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    try:
        return model.model_validate(data)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(part) for part in err['loc']) or '<root>'}: {err['msg']}" for err in e.errors()
        )
        raise ValueError(f"{path}: {problems}") from e
