# Copyright (c) alleepy contributors. All rights reserved.
# Licensed under the MIT license.

from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from . import Field
from . import defaults
from ._common import _assert, _assert_dimension
from ._potential import Box

__ALL__ = ["Grid"]


class Grid(NamedTuple):
    """
    A uniform cell-centered grid on an interval or a rectangle. Fields on a grid are arrays shaped `Grid.shape`,
    indexed `[i]` in 1 dimension and `[i, j]` (x first) in 2.
    """

    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    cells: Tuple[int, ...]

    @classmethod
    def create(cls, lower: Sequence[float], upper: Sequence[float], cells: Sequence[int]) -> "Grid":
        grid = cls(tuple(float(v) for v in lower), tuple(float(v) for v in upper), tuple(int(v) for v in cells))
        grid.validate()
        return grid

    @classmethod
    def from_box(cls, box: Box, cells: Sequence[int]) -> "Grid":
        return cls.create(box.lower, box.upper, cells)

    def validate(self):
        _assert_dimension(len(self.cells), "grid dimension")
        _assert(len(self.lower) == len(self.upper) == len(self.cells), "lower, upper and cells must have one entry per axis")
        _assert(all(lo < hi for lo, hi in zip(self.lower, self.upper)), "grid bounds must satisfy lower < upper")
        _assert(all(np.isfinite(self.lower)) and all(np.isfinite(self.upper)), "grid bounds must be finite")
        _assert(
            all(n >= defaults.MIN_CELLS for n in self.cells),
            f"every axis needs at least {defaults.MIN_CELLS} cells",
        )

    @property
    def dimension(self) -> int:
        return len(self.cells)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.cells

    @property
    def size(self) -> int:
        return int(np.prod(self.cells))

    @property
    def box(self) -> Box:
        return Box(self.lower, self.upper)

    @property
    def spacing(self) -> Tuple[float, ...]:
        return tuple((hi - lo) / n for lo, hi, n in zip(self.lower, self.upper, self.cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis_centers(self) -> List[np.ndarray]:
        return [lo + (np.arange(n) + 0.5) * dx for lo, n, dx in zip(self.lower, self.cells, self.spacing)]

    def axis_faces(self) -> List[np.ndarray]:
        return [lo + np.arange(n + 1) * dx for lo, n, dx in zip(self.lower, self.cells, self.spacing)]

    def centers(self) -> np.ndarray:
        """Cell centers shaped `shape + (dimension,)`."""
        return np.stack(np.meshgrid(*self.axis_centers(), indexing="ij"), axis=-1)

    def integrate(self, field: Field) -> float:
        return float(np.sum(field) * self.cell_volume)

    def zeros(self) -> Field:
        return np.zeros(self.shape)
