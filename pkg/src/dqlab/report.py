"""Deterministic CSV / JSON serialization of scenario results."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from dqlab.errors import ValidationError

FORMATS = ("csv", "json")


def to_jsonable(obj: Any) -> Any:
    """Convert numpy values and complex numbers into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValidationError(f"non-finite value {x} cannot be serialized")
        return x
    return obj


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def render_json(payload: dict[str, Any]) -> str:
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def render_csv(rows: list[dict[str, Any]]) -> str:
    if not rows:
        raise ValidationError("no rows to write")
    header = list(rows[0])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        if list(row) != header:
            raise ValidationError("all rows must share the same columns")
        writer.writerow(_cell(row[k]) for k in header)
    return buf.getvalue()


def _cell(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    return str(v)


def emit_report(results: dict[str, Any], fmt: str, path: str | Path) -> list[Path]:
    """Write ``results`` (keys ``table`` and ``meta``) and return the files written.

    JSON puts everything in one file. CSV writes the table to ``path`` and the
    remaining fields to ``<path>.meta.json``.
    """
    if fmt not in FORMATS:
        raise ValidationError(f"unsupported format {fmt!r}; choose from {FORMATS}")
    if not results or not results.get("table"):
        raise ValidationError("results are empty")
    path = Path(path)
    if fmt == "json":
        path.write_text(render_json(results), encoding="utf-8")
        return [path]
    path.write_text(render_csv(results["table"]), encoding="utf-8")
    meta_path = path.with_name(path.name + ".meta.json")
    meta_path.write_text(render_json({k: v for k, v in results.items() if k != "table"}), encoding="utf-8")
    return [path, meta_path]
