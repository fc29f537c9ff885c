"""Deterministic report serialization.

Audit reports must be byte-identical across runs with the same seed, so
JSON is emitted by a small canonical writer: object keys sorted, floats
printed with 17 significant digits, no locale or hash-order dependence.
CSV rows use the same float formatting.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

__all__ = [
    "format_float",
    "dumps",
    "write_json",
    "write_csv",
    "sha256_of_arrays",
]


def format_float(x: float) -> str:
    if not np.isfinite(x):
        # JSON has no inf/nan literals; reports encode them as strings.
        return json.dumps("inf" if x > 0 else ("-inf" if x < 0 else "nan"))
    return format(float(x), ".17g")


def _encode(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool) or isinstance(obj, np.bool_):
        return "true" if bool(obj) else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_encode(x) for x in obj) + "]"
    if isinstance(obj, dict):
        parts = []
        for key in sorted(obj):
            if not isinstance(key, str):
                raise TypeError(f"report keys must be strings, got {key!r}")
            parts.append(json.dumps(key, ensure_ascii=False) + ":" + _encode(obj[key]))
        return "{" + ",".join(parts) + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__} into a report")


def dumps(obj) -> str:
    return _encode(obj) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def _csv_cell(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, bool) or isinstance(x, np.bool_):
        return "true" if bool(x) else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    raise TypeError(f"cannot put {type(x).__name__} in a CSV cell")


def write_csv(path, header: list[str], rows) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    lines.extend(",".join(_csv_cell(x) for x in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def sha256_of_arrays(*arrays) -> str:
    """Stable content hash of the arrays defining one audit trial."""
    digest = hashlib.sha256()
    for a in arrays:
        arr = np.ascontiguousarray(a)
        digest.update(str(arr.dtype).encode())
        digest.update(str(arr.shape).encode())
        digest.update(arr.tobytes())
    return digest.hexdigest()
