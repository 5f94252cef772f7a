# apps/transform/io.py
"""DataGrid CSV files and scene fingerprints."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Union

import numpy as np

from apps.core.exceptions import ConfigError
from apps.transform.schemas import DataGrid
from conf.enhanced_logging import get_logger

logger = get_logger(__name__)

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
NUMBER_FORMAT = "%.17g"
GRID_COLUMNS = "x,d,value"


def fnv1a_64(data: bytes) -> int:
    value = FNV_OFFSET
    for byte in data:
        value ^= byte
        value = (value * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return value


def canonical_text(fingerprint: Mapping[str, str]) -> str:
    """Key-sorted `key=value` lines with all whitespace removed from values."""
    return "".join(f"{key}={''.join(str(fingerprint[key]).split())}\n" for key in sorted(fingerprint))


def scene_hash(scene) -> str:
    """FNV-1a 64 of the scene's canonical fingerprint, as 16 hex digits."""
    return f"{fnv1a_64(canonical_text(scene.fingerprint()).encode('utf-8')):016x}"


def atomic_write(path: Union[str, Path], lines: Iterable[str]) -> Path:
    """Write text through a temporary file in the same directory, then rename over `path`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    handle = tempfile.NamedTemporaryFile(
        "w", dir=path.parent, prefix=f".{path.name}.", suffix=".tmp", delete=False, newline="\n", encoding="utf-8"
    )
    try:
        with handle:
            for line in lines:
                handle.write(line)
                handle.write("\n")
        os.replace(handle.name, path)
    except BaseException:
        Path(handle.name).unlink(missing_ok=True)
        raise
    logger.debug(f"Wrote {path}")
    return path


def format_number(value: float) -> str:
    return NUMBER_FORMAT % value


def write_table_csv(path: Union[str, Path], header: Mapping[str, str], columns: List[str], rows: np.ndarray) -> Path:
    """`# key=value` header lines, a column line, then rows at 17 significant digits."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    lines = [f"# {key}={value}" for key, value in header.items()]
    lines.append(",".join(columns))
    lines.extend(",".join(format_number(v) for v in row) for row in rows)
    return atomic_write(path, lines)


def read_table_csv(path: Union[str, Path]) -> tuple[Dict[str, str], List[str], np.ndarray]:
    """
    Parse a file written by `write_table_csv`.

    Raises:
        ConfigError: missing file, malformed header or non-numeric rows
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"data file not found: {path}", path=str(path))
    header: Dict[str, str] = {}
    columns: List[str] = []
    skip = 0
    with path.open(encoding="utf-8") as handle:
        for line in handle:
            skip += 1
            text = line.strip()
            if text.startswith("#"):
                key, sep, value = text[1:].strip().partition("=")
                if not sep:
                    raise ConfigError("malformed header line", path=str(path), line=skip)
                header[key.strip()] = value.strip()
                continue
            columns = text.split(",")
            break
    if not columns:
        raise ConfigError("data file has no column line", path=str(path))
    try:
        rows = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2, dtype=float)
    except ValueError as exc:
        raise ConfigError(f"malformed data row: {exc}", path=str(path)) from exc
    if rows.size and rows.shape[1] != len(columns):
        raise ConfigError("row width does not match the column line", path=str(path), columns=columns)
    return header, columns, rows


def write_datagrid_csv(grid: DataGrid, path: Union[str, Path]) -> Path:
    """Row-major `x,d,value` triples (x outer) with scene_hash and quad_tol header lines."""
    gx, gd = np.meshgrid(grid.axis1, grid.axis2, indexing="ij")
    rows = np.column_stack((gx.ravel(), gd.ravel(), grid.values.ravel()))
    header = {"scene_hash": grid.scene_hash, "quad_tol": format_number(grid.quad_tol)}
    return write_table_csv(path, header, GRID_COLUMNS.split(","), rows)


def read_datagrid_csv(path: Union[str, Path]) -> DataGrid:
    """
    Load a DataGrid written by `write_datagrid_csv`.

    Raises:
        ConfigError: the file is not a complete x-major grid
    """
    header, columns, rows = read_table_csv(path)
    if columns != GRID_COLUMNS.split(","):
        raise ConfigError(f"expected columns {GRID_COLUMNS}", path=str(path), columns=columns)
    if rows.size == 0:
        raise ConfigError("data file holds no rows", path=str(path))
    axis1 = np.unique(rows[:, 0])
    axis2 = np.unique(rows[:, 1])
    if rows.shape[0] != axis1.size * axis2.size:
        raise ConfigError("data rows do not form a full grid", path=str(path))
    expected_x = np.repeat(axis1, axis2.size)
    expected_d = np.tile(axis2, axis1.size)
    if not (np.array_equal(rows[:, 0], expected_x) and np.array_equal(rows[:, 1], expected_d)):
        raise ConfigError("data rows are not in x-major order", path=str(path))
    try:
        quad_tol = float(header.get("quad_tol", "0"))
    except ValueError as exc:
        raise ConfigError("quad_tol header is not a number", path=str(path)) from exc
    return DataGrid(
        axis1=axis1,
        axis2=axis2,
        values=rows[:, 2].reshape(axis1.size, axis2.size),
        scene_hash=header.get("scene_hash", ""),
        quad_tol=quad_tol,
    )
