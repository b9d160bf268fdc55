"""Deterministic CSV output.

Floats are written with ``repr`` (shortest round-trip form), so reading a
file back reproduces every value bit for bit and identical runs give
identical bytes.  Writes go to a temporary file that is renamed into place.
"""
from __future__ import annotations

import csv
import os
import tempfile
from pathlib import Path

import numpy as np

from .grid import SpatialGrid

HISTORY_COLUMNS = ("iter", "j", "grad_norm", "delta", "cg_iters", "status", "forward_solves")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            os.unlink(tmp)
            raise
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def _rows_text(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_table(header, rows, path) -> Path:
    return atomic_write(path, _rows_text(header, rows))


def write_field(field, grid: SpatialGrid, path) -> Path:
    """CSV ``x,y,c1[,c2,...]``, one row per node with ``y`` outer."""
    c = np.asarray(field, dtype=float)
    if c.shape == grid.shape:
        c = c[None]
    if c.shape[1:] != grid.shape:
        raise ValueError(f"field shape {field.shape} does not match grid {grid.shape}")
    header = ["x", "y"] + [f"c{i + 1}" for i in range(c.shape[0])]
    rows = []
    for j, y in enumerate(grid.y):
        for i, x in enumerate(grid.x):
            rows.append([float(x), float(y), *(float(v) for v in c[:, j, i])])
    return write_table(header, rows, path)


def read_field(path):
    """Inverse of :func:`write_field`: ``(x, y, values)`` with values ``(ncomp, ny, nx)``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(v) for v in row] for row in reader])
    x = np.unique(data[:, 0])
    y = np.unique(data[:, 1])
    ncomp = len(header) - 2
    values = data[:, 2:].T.reshape(ncomp, len(y), len(x))
    return x, y, values


def write_history(history, path) -> Path:
    rows = [[getattr(h, k) for k in HISTORY_COLUMNS] for h in history]
    return write_table(HISTORY_COLUMNS, rows, path)
