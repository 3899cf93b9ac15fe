"""Canonical JSON: sorted keys, reals with six decimals, two-space indent, LF endings.

The stdlib encoder has no hook for fixed-precision floats, so this walks the
value tree itself and defers to :func:`json.dumps` for strings only.
"""
from __future__ import annotations

import json
import math

DECIMALS = 6


def format_real(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite real {x!r} cannot be serialized")
    text = f"{x:.{DECIMALS}f}"
    if text.startswith("-") and float(text) == 0.0:
        text = text[1:]
    return text


def quantize(x: float) -> float:
    """Round ``x`` to the value it takes after a canonical round trip."""
    return float(format_real(x))


def _encode(value, indent, level, out):
    pad = " " * (indent * (level + 1))
    end_pad = " " * (indent * level)
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        out.append(format_real(value))
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=False))
    elif isinstance(value, dict):
        if not value:
            out.append("{}")
            return
        keys = sorted(value)
        if not all(isinstance(k, str) for k in keys):
            raise TypeError("object keys must be strings")
        out.append("{\n")
        for n, k in enumerate(keys):
            out.append(pad + json.dumps(k, ensure_ascii=False) + ": ")
            _encode(value[k], indent, level + 1, out)
            out.append(",\n" if n < len(keys) - 1 else "\n")
        out.append(end_pad + "}")
    elif isinstance(value, (list, tuple)):
        if not value:
            out.append("[]")
            return
        # short scalar lists (coordinates, rgb) stay on one line
        if len(value) <= 4 and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                   for v in value):
            parts = []
            for v in value:
                _encode(v, indent, level + 1, parts)
            out.append("[" + ", ".join(parts) + "]")
            return
        out.append("[\n")
        for n, v in enumerate(value):
            out.append(pad)
            _encode(v, indent, level + 1, out)
            out.append(",\n" if n < len(value) - 1 else "\n")
        out.append(end_pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(value, indent: int = 2) -> str:
    out = []
    _encode(value, indent, 0, out)
    out.append("\n")
    return "".join(out)
