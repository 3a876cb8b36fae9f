"""CSV/JSON emission and matrix input parsing for the CLI.

Floats are printed with 17 significant digits, '.' decimal separator and
bare newlines, so identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
import sys
from typing import IO, Iterable

import numpy as np

__all__ = ["fmt_float", "write_csv", "dump_json", "read_matrix_text", "open_out"]


def fmt_float(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return str(v)


def write_csv(stream: IO[str], header: Iterable[str], rows: Iterable[Iterable]) -> None:
    stream.write(",".join(header) + "\n")
    for row in rows:
        stream.write(",".join(_cell(v) for v in row) + "\n")


def dump_json(stream: IO[str], obj) -> None:
    json.dump(obj, stream, indent=2, sort_keys=False)
    stream.write("\n")


def read_matrix_text(text: str) -> np.ndarray:
    """Parse a 4x4 matrix from 16 whitespace-separated reals (row-major) or
    from a coin/matrix JSON object."""
    text = text.strip()
    if text.startswith("{"):
        obj = json.loads(text)
        from .coins import coin_from_json
        return coin_from_json(obj).entries
    vals = [float(v) for v in text.split()]
    if len(vals) != 16:
        raise ValueError(f"expected 16 whitespace-separated reals, got {len(vals)}")
    return np.array(vals).reshape(4, 4)


def open_out(path: str | None):
    """Stream for --out; stdout when absent."""
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True
