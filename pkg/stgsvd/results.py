"""Write experiment rows as CSV or JSON."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, TextIO

import numpy as np

from .const import CSV_FLOAT_FORMAT, FORMAT_CSV, FORMAT_JSON, RESULTS_SCHEMA
from .exceptions import ConfigError

_LOGGER = logging.getLogger(__name__)


def _plain(value: Any) -> Any:
    """Convert numpy scalars and non-finite floats to JSON-safe values."""
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {key: _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    return value


def format_cell(value: Any) -> str:
    """Render one CSV cell; floats get 17 significant digits."""
    value = _plain(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, CSV_FLOAT_FORMAT)
    return str(value)


def render_csv(rows: Iterable[Mapping[str, Any]], columns: tuple[str, ...]) -> str:
    """Return rows as CSV text with a fixed header order."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(row.get(column)) for column in columns])
    return buffer.getvalue()


def render_json(
    rows: Iterable[Mapping[str, Any]],
    columns: tuple[str, ...],
    metadata: Optional[Mapping[str, Any]] = None,
) -> str:
    """Return rows as a JSON document.

    Floats use Python's shortest round-trip representation; NaN becomes null.
    """
    document = {
        "schema": RESULTS_SCHEMA,
        "metadata": _plain(dict(metadata or {})),
        "columns": list(columns),
        "rows": [{column: _plain(row.get(column)) for column in columns} for row in rows],
    }
    return json.dumps(document, indent=2, allow_nan=False) + "\n"


def emit_results(
    rows: list[Mapping[str, Any]],
    columns: tuple[str, ...],
    fmt: str,
    path: Optional[str | Path] = None,
    metadata: Optional[Mapping[str, Any]] = None,
    stream: Optional[TextIO] = None,
) -> None:
    """Write rows to ``path`` (or ``stream``, stdout by default).

    Raises:
        ConfigError: If there are no rows or the format is unknown; no file
            is created in either case
    """
    if not rows:
        raise ConfigError("no rows to write", "rows")
    if fmt == FORMAT_CSV:
        text = render_csv(rows, columns)
    elif fmt == FORMAT_JSON:
        text = render_json(rows, columns, metadata)
    else:
        raise ConfigError(f"unsupported format: {fmt}", "format")

    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
        _LOGGER.info("Wrote %d rows to %s", len(rows), path)
    else:
        (stream or sys.stdout).write(text)
