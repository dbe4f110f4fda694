"""CSV/JSON writers.  Floats are printed at 17 significant digits so the
files are byte-stable across runs."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


def fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".17g")


def csv_text(columns: dict) -> str:
    names = list(columns)
    lines = [",".join(names)]
    data = [np.asarray(columns[n]) for n in names]
    n_rows = len(data[0]) if data else 0
    for i in range(n_rows):
        lines.append(",".join(fmt(col[i]) for col in data))
    return "\n".join(lines) + "\n"


def read_csv(path: str | Path) -> dict[str, np.ndarray]:
    text = Path(path).read_text().splitlines()
    names = text[0].split(",")
    rows = [line.split(",") for line in text[1:] if line]
    cols = {}
    for j, name in enumerate(names):
        values = [r[j] for r in rows]
        try:
            cols[name] = np.array([float(v) for v in values])
        except ValueError:
            cols[name] = np.array(values)
    return cols


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def json_text(payload) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=False) + "\n"


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path
