"""Atomic CSV/JSON writers shared by the report-producing modules."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path


def _atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def format_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, complex):
        return f"{v.real!r}{v.imag:+}j"
    return str(v)


def csv_text(table: str, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# rotorqec {table} v1\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_csv(path, table: str, columns, rows) -> Path:
    """Write ``rows`` under a ``# rotorqec <table> v1`` comment line, atomically."""
    return _atomic_write_text(path, csv_text(table, columns, rows))


def write_json(path, obj) -> Path:
    return _atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True, default=float) + "\n")
