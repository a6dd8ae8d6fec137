"""Readers for the versioned rdch artifacts.

Strictly read-only: every loader parses a file into numpy arrays or plain
dicts and validates the columns/keys it needs, reporting the offending name
on a mismatch.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

__all__ = [
    "SchemaError",
    "load_diagnostics",
    "load_snapshot",
    "load_sweep_report",
    "load_meta",
    "find_snapshots",
    "TIMESERIES_COLUMNS",
]

TIMESERIES_COLUMNS = ("t", "mass", "energy", "entropy", "complementarity")
SNAPSHOT_COLUMNS = ("n", "w", "mu", "p")


class SchemaError(ValueError):
    """An artifact does not conform to the expected schema."""


def _read_csv_columns(path: Path, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path} not found")
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path.name}: empty file") from None
        for name in required:
            if name not in header:
                raise SchemaError(f"{path.name}: missing column: {name}")
        rows = [row for row in reader if row]
    if not rows:
        raise SchemaError(f"{path.name}: no data rows")
    data = np.array([[float(v) for v in row] for row in rows])
    if data.shape[1] != len(header):
        raise SchemaError(f"{path.name}: ragged rows")
    return {name: data[:, i].copy() for i, name in enumerate(header)}


def load_diagnostics(path: str | Path) -> dict[str, np.ndarray]:
    """Diagnostics time series; validates the panels the figures need."""
    return _read_csv_columns(Path(path), TIMESERIES_COLUMNS)


def load_snapshot(path: str | Path) -> dict[str, np.ndarray]:
    """One field snapshot (x[, y], n, w, mu, p)."""
    cols = _read_csv_columns(Path(path), ("x",) + SNAPSHOT_COLUMNS)
    return cols


def find_snapshots(directory: str | Path) -> list[Path]:
    return sorted(Path(directory).glob("snapshot_*.csv"))


def load_meta(directory: str | Path) -> dict:
    path = Path(directory) / "meta.json"
    if not path.exists():
        return {}
    return json.loads(path.read_text())


def load_sweep_report(path: str | Path) -> dict:
    path = Path(path)
    if path.is_dir():
        path = path / "report.json"
    if not path.exists():
        raise SchemaError(f"{path} not found")
    report = json.loads(path.read_text())
    for key in ("parameter", "values", "metrics"):
        if key not in report:
            raise SchemaError(f"{path.name}: missing key: {key}")
    if len(report["values"]) == 0:
        raise SchemaError(f"{path.name}: empty sweep")
    return report
