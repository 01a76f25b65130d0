"""Deterministic machine (JSON) and human renderings of a report document.

A report is a tree of dicts, lists, strings, booleans, integers and floats.
Both renderings format every float through :func:`format_number`, so they
carry identical digits. Dict order is preserved; nothing time-dependent is
ever added.
"""

from __future__ import annotations

import json
import math
from collections.abc import Mapping, Sequence

import numpy as np

# 17 significant digits: enough to round-trip every double
_FLOAT_FORMAT = ".16e"


def format_number(value: float | int) -> str:
    if isinstance(value, (bool, np.bool_)):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value) + 0.0  # folds -0.0 into 0.0
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, _FLOAT_FORMAT)


def _is_number(value) -> bool:
    return isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(
        value, (bool, np.bool_)
    )


def _scalar_json(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if _is_number(value):
        text = format_number(value)
        # JSON has no non-finite numbers
        return json.dumps(text) if text in ("nan", "inf", "-inf") else text
    return json.dumps(str(value))


def to_json(doc, indent: int = 2, _level: int = 0) -> str:
    """Serialize ``doc`` with fixed float formatting and stable layout."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(doc, Mapping):
        if not doc:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in doc.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(doc, Sequence) and not isinstance(doc, str):
        if not doc:
            return "[]"
        if all(not isinstance(v, (Mapping, list, tuple)) for v in doc):
            return "[" + ", ".join(_scalar_json(v) for v in doc) + "]"
        items = [pad + to_json(v, indent, _level + 1) for v in doc]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    return _scalar_json(doc)


def _scalar_text(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, (bool, np.bool_)):
        return "yes" if value else "no"
    if _is_number(value):
        return format_number(value)
    return str(value)


def render_text(doc, _level: int = 0) -> str:
    """Indented ``key: value`` rendering for terminals."""
    pad = "  " * _level
    lines: list[str] = []
    if isinstance(doc, Mapping):
        for key, value in doc.items():
            if isinstance(value, Mapping) or (
                isinstance(value, (list, tuple)) and any(isinstance(v, Mapping) for v in value)
            ):
                lines.append(f"{pad}{key}:")
                lines.append(render_text(value, _level + 1))
            elif isinstance(value, (list, tuple)):
                lines.append(f"{pad}{key}: [" + ", ".join(_scalar_text(v) for v in value) + "]")
            else:
                lines.append(f"{pad}{key}: {_scalar_text(value)}")
    elif isinstance(doc, (list, tuple)):
        for item in doc:
            if isinstance(item, Mapping):
                lines.append(f"{pad}-")
                lines.append(render_text(item, _level + 1))
            else:
                lines.append(f"{pad}- {_scalar_text(item)}")
    else:
        lines.append(pad + _scalar_text(doc))
    return "\n".join(line for line in lines if line)
