"""Deterministic CSV/JSON artifact writers.

All writers format floats with repr (shortest round-tripping form), sort any
unordered content, and never write timestamps, so identical inputs produce
byte-identical artifacts.  Headers are documented in docs/formats.md.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

__all__ = ["fmt", "write_csv", "write_json", "config_hash"]


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(x)


def write_csv(path, header: list, rows, preamble: dict | None = None) -> None:
    """Write rows (dicts or sequences) under a fixed column header.

    ``preamble`` entries become leading '# key=value' comment lines (sorted),
    carrying the config hash and grid/margin audit that make artifacts
    self-describing.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    if preamble:
        for k in sorted(preamble):
            lines.append(f"# {k}={fmt(preamble[k])}")
    lines.append(",".join(header))
    for row in rows:
        if isinstance(row, dict):
            lines.append(",".join(fmt(row.get(col, "")) for col in header))
        else:
            lines.append(",".join(fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def write_json(path, payload: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]
