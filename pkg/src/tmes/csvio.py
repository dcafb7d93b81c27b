"""CSV and JSON writers/readers shared by the rolling analysis and the CLI.

Dialect: comma separated, ``.`` decimal point, one header row, and any
number of leading ``#`` comment lines. Run metadata goes on a single
``# config: {...}`` line so that it can be read back and re-run.
"""
from __future__ import annotations

import csv
import io
import json
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import TmesError

CONFIG_PREFIX = "# config: "


class CsvFormatError(TmesError):
    pass


def fmt(value) -> str:
    """Shortest round-trip text for numbers; everything else via ``str``."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def dumps_config(config: dict) -> str:
    return json.dumps(config, sort_keys=True, separators=(",", ":"), default=_json_default)


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


@contextmanager
def open_output(path):
    """Text handle for ``path``; ``None`` or ``"-"`` means stdout."""
    if path is None or str(path) == "-":
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def render_csv(header: Sequence[str], rows: Iterable[Sequence], config: dict | None = None) -> str:
    buf = io.StringIO()
    if config is not None:
        buf.write(CONFIG_PREFIX + dumps_config(config) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows, config: dict | None = None) -> None:
    text = render_csv(header, rows, config)
    with open_output(path) as fh:
        fh.write(text)


def render_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, default=_json_default) + "\n"


def read_config(path) -> dict:
    """Embedded run config from a CSV comment line or a JSON output/config file."""
    text = Path(path).read_text(encoding="utf-8")
    for line in text.splitlines():
        if line.startswith(CONFIG_PREFIX):
            return json.loads(line[len(CONFIG_PREFIX):])
        if not line.startswith("#"):
            break
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CsvFormatError(f"{path}: no embedded config found") from exc
    if not isinstance(payload, dict):
        raise CsvFormatError(f"{path}: config must be a JSON object")
    return payload.get("config", payload)


def read_table(path) -> tuple[list[str], list[tuple[int, list[str]]]]:
    """Header and ``(line_number, fields)`` rows of a CSV file, comments skipped."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [(i, line) for i, line in enumerate(fh, start=1)
                 if line.strip() and not line.lstrip().startswith("#")]
    if not lines:
        raise CsvFormatError(f"{path}: no header row")
    parsed = list(csv.reader(line for _, line in lines))
    header = [h.strip() for h in parsed[0]]
    rows = [(lineno, [f.strip() for f in fields]) for (lineno, _), fields in zip(lines[1:], parsed[1:])]
    return header, rows


def column_index(header: Sequence[str], name: str, path) -> int:
    try:
        return list(header).index(name)
    except ValueError:
        raise CsvFormatError(f"{path}: missing column {name!r} (have {', '.join(header)})") from None


def parse_float(text: str, path, lineno: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise CsvFormatError(f"{path}:{lineno}: cannot parse {text!r} in column {column!r}") from None
    if not np.isfinite(value):
        raise CsvFormatError(f"{path}:{lineno}: non-finite {text!r} in column {column!r}")
    return value


def read_columns(path, names: Sequence[str]) -> list[np.ndarray]:
    """Float columns by name."""
    header, rows = read_table(path)
    idx = [column_index(header, name, path) for name in names]
    out = [np.empty(len(rows)) for _ in names]
    for r, (lineno, fields) in enumerate(rows):
        if len(fields) != len(header):
            raise CsvFormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(fields)}")
        for col, (j, name) in enumerate(zip(idx, names)):
            out[col][r] = parse_float(fields[j], path, lineno, name)
    return out
