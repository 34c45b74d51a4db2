"""Deterministic report serialization.

JSON: sorted keys, LF line endings, floats printed with 17 significant
digits (round-trip exact), Fractions as "p/q" strings. CSV: comma-separated,
header row, LF. Identical inputs produce byte-identical files.
"""

from __future__ import annotations

import math
from fractions import Fraction

SCHEMA_VERSION = "1"


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return f"{x:.17g}"


def _fmt_scalar(v):
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return _escape(f"{v.numerator}/{v.denominator}" if v.denominator != 1
                       else str(v.numerator))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return _fmt_float(v)
    if isinstance(v, complex):
        return _escape(f"{_fmt_float(v.real)}+{_fmt_float(v.imag)}j")
    if isinstance(v, str):
        return _escape(v)
    raise TypeError(f"unsupported scalar {type(v)}")


def _escape(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def to_json(obj, indent=0) -> str:
    """Canonical JSON text of nested dicts/lists/scalars."""
    pad = "  " * indent
    pad1 = "  " * (indent + 1)
    try:
        import numpy as np
        if isinstance(obj, np.integer):
            obj = int(obj)
        elif isinstance(obj, np.floating):
            obj = float(obj)
        elif isinstance(obj, np.bool_):
            obj = bool(obj)
        elif isinstance(obj, np.ndarray):
            obj = obj.tolist()
    except ImportError:
        pass
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for k in sorted(obj, key=str):
            items.append(f"{pad1}{_escape(str(k))}: {to_json(obj[k], indent + 1)}")
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad1}{to_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return _fmt_scalar(obj)


def write_json(path, payload: dict):
    body = dict(payload)
    body["schema_version"] = SCHEMA_VERSION
    with open(path, "w", newline="\n") as f:
        f.write(to_json(body))
        f.write("\n")


def write_csv(path, header, rows):
    """Rows of scalars; floats at 17 significant digits; LF endings."""

    def cell(v):
        if v is None:
            return ""
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, Fraction):
            return str(v)
        if isinstance(v, float):
            return _fmt_float(v)
        return str(v)

    with open(path, "w", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(cell(v) for v in row) + "\n")
