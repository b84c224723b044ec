"""Input readers with strict schema validation.

Every reader raises SchemaError naming the offending file and column, so a
mismatched or truncated log fails loudly before any figure is produced.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

TRAJECTORY_COLUMNS = [
    "t", "sig1", "sig2", "sig3", "om1", "om2", "om3",
    "hw1", "hw2", "hw3", "u1", "u2", "u3", "rho", "delta", "solve_ms",
]
PARETO_COLUMNS = ["t_final", "energy", "status"]
TUNINGS_COLUMNS = ["nu", "alpha", "t_final", "energy", "status"]


class SchemaError(ValueError):
    """Input file does not match the documented schema."""


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: file does not exist")
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise SchemaError(f"{path}: file is empty")
    header, data = rows[0], rows[1:]
    if not data:
        raise SchemaError(f"{path}: no data rows")
    return header, data


def _check_header(path, header: list[str], expected: list[str]) -> None:
    for col in expected:
        if col not in header:
            raise SchemaError(f"{path}: missing column '{col}'")
    for col in header:
        if col not in expected:
            raise SchemaError(f"{path}: unexpected column '{col}'")


def _float_column(path, data, header, name, allow_empty=False) -> np.ndarray:
    idx = header.index(name)
    out = np.full(len(data), np.nan)
    for i, row in enumerate(data):
        cell = row[idx] if idx < len(row) else ""
        if cell == "":
            if not allow_empty:
                raise SchemaError(f"{path}: empty value in column '{name}' (row {i + 2})")
            continue
        try:
            out[i] = float(cell)
        except ValueError as exc:
            raise SchemaError(f"{path}: bad value {cell!r} in column '{name}'") from exc
    return out


def read_trajectory(path) -> dict:
    """Trajectory CSV -> dict of column arrays (NaN where fields are empty)."""
    header, data = _read_rows(path)
    _check_header(path, header, TRAJECTORY_COLUMNS)
    out = {"path": str(path)}
    for name in TRAJECTORY_COLUMNS:
        out[name] = _float_column(path, data, header, name, allow_empty=(name != "t"))
    t = out["t"]
    if np.any(~np.isfinite(t)) or np.any(np.diff(t) <= 0):
        raise SchemaError(f"{path}: column 't' must be finite and strictly increasing")
    return out


def read_pareto(path) -> dict:
    header, data = _read_rows(path)
    _check_header(path, header, PARETO_COLUMNS)
    status = [row[header.index("status")] for row in data]
    return {
        "t_final": _float_column(path, data, header, "t_final"),
        "energy": _float_column(path, data, header, "energy"),
        "status": status,
    }


def read_tunings(path) -> dict:
    header, data = _read_rows(path)
    _check_header(path, header, TUNINGS_COLUMNS)
    return {
        "nu": _float_column(path, data, header, "nu"),
        "alpha": _float_column(path, data, header, "alpha"),
        "t_final": _float_column(path, data, header, "t_final", allow_empty=True),
        "energy": _float_column(path, data, header, "energy"),
        "status": [row[header.index("status")] for row in data],
    }


def read_meta(path) -> dict:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{path}: cannot read JSON metadata ({exc})") from exc
    if "u_max" not in payload:
        raise SchemaError(f"{path}: missing key 'u_max'")
    return payload
