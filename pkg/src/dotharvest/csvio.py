"""Deterministic CSV emission: '.' decimal, comma separator, 17 significant
digits, one schema comment line per file."""

from __future__ import annotations

import os


def format_value(v) -> str:
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def write_table(path: str, columns, rows) -> None:
    """Write rows to ``path`` with a '# columns: ...' header comment."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# columns: " + ",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(format_value(v) for v in row) + "\n")
