"""Readers for the usc-lab result-file schemas.

All inputs are plain files (CSV with a ``# schema_version`` comment line,
or results.json); nothing here imports the solver package.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


class FigureDataError(ValueError):
    """Input file does not match the expected schema; names the columns."""


def read_table(path: str | Path) -> dict[str, list[str]]:
    """A CSV as {column -> list of raw strings}, comment lines skipped."""
    path = Path(path)
    if not path.exists():
        raise FigureDataError(f"input file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        try:
            header = next(reader)
        except StopIteration:
            raise FigureDataError(f"{path}: empty file") from None
        columns: dict[str, list[str]] = {name: [] for name in header}
        for row in reader:
            for name, cell in zip(header, row):
                columns[name].append(cell)
    return columns


def require_columns(table: dict[str, list[str]], needed: list[str], path) -> None:
    missing = [name for name in needed if name not in table]
    if missing:
        raise FigureDataError(
            f"{path}: missing column(s) {', '.join(missing)} (have: {', '.join(table)})"
        )


def floats(table: dict[str, list[str]], name: str) -> np.ndarray:
    return np.array([float(v) for v in table[name]])


def flags(table: dict[str, list[str]], name: str) -> np.ndarray:
    return np.array([v.strip() in ("1", "True", "true") for v in table[name]])


def prefixed(table: dict[str, list[str]], prefix: str) -> list[str]:
    return [name for name in table if name.startswith(prefix)]


def read_results(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise FigureDataError(f"input file not found: {path}")
    with open(path) as fh:
        payload = json.load(fh)
    if "capacities_mw" not in payload:
        raise FigureDataError(f"{path}: missing field capacities_mw (not an optimal-run results file?)")
    return payload


def split_by_flag(values: np.ndarray, mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Partition values into (flag off, flag on); together they cover all hours."""
    mask = np.asarray(mask, dtype=bool)
    return values[~mask], values[mask]
