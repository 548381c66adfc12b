"""Reading the CSV tables the numerical CLI writes.

Every table is a comma-separated header line followed by numeric rows.
Readers check the header against the columns a figure kind needs and
report mismatches by name rather than failing on a stray index error.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class TableError(Exception):
    """Raised for missing files, empty tables, or column mismatches."""


@dataclass(frozen=True)
class Table:
    path: Path
    columns: tuple[str, ...]
    data: np.ndarray  # shape (n_rows, n_columns)

    def col(self, name: str) -> np.ndarray:
        try:
            return self.data[:, self.columns.index(name)]
        except ValueError as exc:
            raise TableError(f"{self.path}: no column '{name}'") from exc


def read_table(path: str | Path) -> Table:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError as exc:
        raise TableError(f"input CSV not found: {path}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise TableError(f"{path}: file is empty")
    columns = tuple(c.strip() for c in lines[0].split(","))
    if len(lines) == 1:
        raise TableError(f"{path}: header only, no data rows")
    try:
        data = np.loadtxt(lines[1:], delimiter=",", ndmin=2)
    except ValueError as exc:
        raise TableError(f"{path}: could not parse numeric rows: {exc}") from exc
    if data.shape[1] != len(columns):
        raise TableError(
            f"{path}: header names {len(columns)} columns "
            f"{list(columns)} but rows have {data.shape[1]} fields"
        )
    return Table(path=path, columns=columns, data=data)


def require_columns(table: Table, required: tuple[str, ...], kind: str) -> None:
    missing = [c for c in required if c not in table.columns]
    if missing:
        raise TableError(
            f"{table.path}: kind '{kind}' needs columns {list(required)}; "
            f"missing {missing}, found {list(table.columns)}"
        )


def optional_column(table: Table, name: str) -> np.ndarray | None:
    if name in table.columns:
        return table.col(name)
    warnings.warn(f"{table.path}: optional column '{name}' missing", stacklevel=2)
    return None
