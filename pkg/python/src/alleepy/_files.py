# Copyright (c) alleepy contributors. All rights reserved.
# Licensed under the MIT license.

import csv
from pathlib import Path
from typing import Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from . import Field
from ._common import _assert
from ._grid import Grid
from ._timestepping import Diagnostics

__ALL__ = ["snapshot_to_file", "snapshot_from_file", "diagnostics_to_file", "diagnostics_from_file"]

FLOAT_FORMAT = "%.17g"
""" Every float written by alleepy round-trips exactly. """


def _assert_existing_file(file_path: str, parameter: str):
    _assert(Path(file_path).is_file(), f"{parameter} must be an existing file")


def _format(value) -> str:
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % value
    return str(value)


class SnapshotTable(NamedTuple):
    """The contents of a snapshot file."""

    coordinates: np.ndarray
    """ Cell centers, shaped `(cells, n)`, x varying slowest """
    fields: Dict[str, np.ndarray]
    """ One column per species, keyed by `u` and `v` """


def snapshot_to_file(snapshot_file: str, grid: Grid, u: Field, v: Optional[Field] = None) -> None:
    """
    Writes one snapshot as comma separated text with a header row: `x,u` on an interval, `x,y,u` on a rectangle, and
    an extra `v` column for two species. Rows run over the cells in row-major order.

    ### Parameters
    - **snapshot_file**: where to write
    - **grid**: the cells the fields live on
    - **u**: first species, shaped like the grid
    - **v**: optional second species
    """
    columns = [grid.centers().reshape(grid.size, grid.dimension)]
    header = ["x", "y"][: grid.dimension] + ["u"]
    for name, field in (("u", u), ("v", v)):
        if field is None:
            continue
        field = np.asarray(field, dtype=np.float64)
        _assert(field.size == grid.size, f"{name} must have one value per cell")
        columns.append(field.reshape(grid.size, 1))
    if v is not None:
        header.append("v")
    np.savetxt(snapshot_file, np.hstack(columns), delimiter=",", header=",".join(header), comments="", fmt=FLOAT_FORMAT)


def snapshot_from_file(snapshot_file: str) -> SnapshotTable:
    """
    Reads a file written by `snapshot_to_file`.

    ### Returns
    `alleepy.SnapshotTable`
    """
    _assert_existing_file(snapshot_file, "snapshot_file")
    with open(snapshot_file) as fh:
        header = fh.readline().strip().split(",")
    _assert("u" in header, "snapshot files must have a u column")
    data = np.loadtxt(snapshot_file, delimiter=",", skiprows=1, ndmin=2)
    dimension = header.index("u")
    fields = {name: data[:, i].copy() for i, name in enumerate(header) if i >= dimension}
    return SnapshotTable(data[:, :dimension].copy(), fields)


def diagnostics_to_file(diagnostics_file: str, diagnostics: Diagnostics) -> None:
    """
    Writes per-step diagnostics with the header `t,mass,umax,umin,reaction_integral,dt`.
    """
    np.savetxt(
        diagnostics_file,
        np.column_stack(diagnostics),
        delimiter=",",
        header=",".join(Diagnostics._fields),
        comments="",
        fmt=FLOAT_FORMAT,
    )


def diagnostics_from_file(diagnostics_file: str) -> Diagnostics:
    _assert_existing_file(diagnostics_file, "diagnostics_file")
    with open(diagnostics_file) as fh:
        header = tuple(fh.readline().strip().split(","))
    _assert(header == Diagnostics._fields, f"diagnostics files must have the header {','.join(Diagnostics._fields)}")
    data = np.loadtxt(diagnostics_file, delimiter=",", skiprows=1, ndmin=2)
    return Diagnostics.from_rows(data)


def table_to_file(table_file: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    """Writes a small mixed text and number table, floats printed with `%.17g`."""
    with open(table_file, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            _assert(len(row) == len(header), "every row must match the header")
            writer.writerow([_format(value) for value in row])


def table_from_file(table_file: str) -> Tuple[Tuple[str, ...], Tuple[Tuple[str, ...], ...]]:
    _assert_existing_file(table_file, "table_file")
    with open(table_file, newline="") as fh:
        rows = [tuple(row) for row in csv.reader(fh)]
    _assert(len(rows) > 0, "table files must have a header row")
    return rows[0], tuple(rows[1:])
