"""File I/O helpers: atomic writes, 17-significant-digit floats, CSV/JSON.

All analysis artifacts go through these helpers so that identical inputs
produce byte-identical files: floats are always rendered with repr-exact
precision, rows are emitted in a fixed order, and every write lands via a
temp file + rename so readers never observe a half-written artifact.
"""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile

import numpy as np

from .errors import DataError

_FLOAT_FMT = ".17g"


def fmt_float(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, _FLOAT_FMT)


def atomic_write_text(path, text: str) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_csv(path, columns, rows, comments=()) -> None:
    """Write a CSV with optional '# key=value' comment lines above the header."""
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([cell if isinstance(cell, str) else _render(cell) for cell in row])
    atomic_write_text(path, buf.getvalue())


def _render(cell) -> str:
    if isinstance(cell, (bool, np.bool_)):
        return "true" if cell else "false"
    if isinstance(cell, (int, np.integer)):
        return str(int(cell))
    if isinstance(cell, (float, np.floating)):
        return fmt_float(cell)
    if cell is None:
        return ""
    return str(cell)


def read_csv(path):
    """Read a CSV written by write_csv: returns (comments dict, header, rows)."""
    comments: dict[str, str] = {}
    rows: list[list[str]] = []
    header: list[str] | None = None
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            for line in fh:
                if line.startswith("#"):
                    text = line[1:].strip()
                    key, sep, value = text.partition("=")
                    if sep:
                        comments[key.strip()] = value.strip()
                    continue
                if not line.strip():
                    continue
                cells = next(csv.reader([line]))
                if header is None:
                    header = cells
                else:
                    rows.append(cells)
    except OSError as exc:
        raise DataError(f"unreadable file: {path} ({exc})") from exc
    if header is None:
        raise DataError(f"corrupt input: {path} has no header row")
    return comments, header, rows


def _json_render(obj, indent: int) -> str:
    pad = " " * indent
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return "null"
        return fmt_float(x)
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = [_json_render(v, indent + 2) for v in obj]
        if not items:
            return "[]"
        inner = (",\n" + pad + "  ").join(items)
        return "[\n" + pad + "  " + inner + "\n" + pad + "]"
    if isinstance(obj, dict):
        items = [
            _json_render(str(k), 0) + ": " + _json_render(v, indent + 2) for k, v in obj.items()
        ]
        if not items:
            return "{}"
        inner = (",\n" + pad + "  ").join(items)
        return "{\n" + pad + "  " + inner + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path, obj) -> None:
    """Serialize with 17-significant-digit floats (insertion-ordered keys)."""
    atomic_write_text(path, _json_render(obj, 0) + "\n")


def read_json(path):
    import json

    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise DataError(f"unreadable file: {path} ({exc})") from exc
    except ValueError as exc:
        raise DataError(f"corrupt input: {path} is not valid JSON ({exc})") from exc
