# Copyright (c) alleepy contributors. All rights reserved.
# Licensed under the MIT license.

from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from . import Field, Point
from . import defaults
from ._common import _assert
from ._grid import Grid
from ._potential import CriticalPoint

__ALL__ = ["SpikeMeasurement", "measure_spikes"]


class SpikeMeasurement(NamedTuple):
    center: Point
    """ The maximum of the signal the spike belongs to """
    height: float
    """ Largest value in the basin of `center` """
    peak: Point
    """ Cell center where `height` is attained """
    offset: float
    """ Distance from `center` to `peak` """
    half_width: float
    """ Mean distance from `peak` at which the field falls to `height / e`; `nan` if it never does """
    off: bool
    """ `height` is below `alleepy.defaults.OFF_HEIGHT` """


def _crossing(profile: np.ndarray, positions: np.ndarray, start: int, step: int, level: float) -> Optional[float]:
    i = start
    while 0 <= i + step < len(profile):
        nxt = i + step
        if not np.isfinite(profile[nxt]):
            # left the basin
            return None
        if profile[nxt] <= level:
            fraction = (profile[i] - level) / (profile[i] - profile[nxt])
            return abs(positions[i] + fraction * (positions[nxt] - positions[i]) - positions[start])
        i = nxt
    return None


def basins(grid: Grid, centers: Sequence[Point]) -> np.ndarray:
    """Index of the nearest center for every cell."""
    cells = grid.centers()
    distances = np.stack([np.sum((cells - c) ** 2, axis=-1) for c in centers], axis=-1)
    return np.argmin(distances, axis=-1)


def measure_spikes(field: Field, grid: Grid, maxima: Sequence[CriticalPoint]) -> List[SpikeMeasurement]:
    """
    Measures the spike sitting on each maximum. A cell belongs to the basin of its nearest maximum.

    ### Parameters
    - **field**: values shaped like the grid
    - **grid**: the cells
    - **maxima**: where spikes are expected

    ### Returns
    One `alleepy.SpikeMeasurement` per maximum, in the same order
    """
    field = np.asarray(field, dtype=np.float64).reshape(grid.shape)
    _assert(bool(np.all(np.isfinite(field))), "field must be finite")
    _assert(len(maxima) > 0, "at least one maximum is required")
    owner = basins(grid, [m.location for m in maxima])
    axes = grid.axis_centers()
    measurements = []
    for site, point in enumerate(maxima):
        masked = np.where(owner == site, field, -np.inf)
        index = np.unravel_index(int(np.argmax(masked)), grid.shape)
        height = float(field[index])
        peak = np.array([axes[k][index[k]] for k in range(grid.dimension)])
        offset = float(np.linalg.norm(peak - point.location))
        if height < defaults.OFF_HEIGHT:
            measurements.append(SpikeMeasurement(point.location, height, peak, offset, np.nan, True))
            continue
        level = height / np.e
        distances = []
        for axis in range(grid.dimension):
            line = list(index)
            line[axis] = slice(None)
            profile = masked[tuple(line)]
            for step in (-1, 1):
                found = _crossing(profile, axes[axis], index[axis], step, level)
                if found is not None:
                    distances.append(found)
        half_width = float(np.mean(distances)) if distances else np.nan
        measurements.append(SpikeMeasurement(point.location, height, peak, offset, half_width, False))
    return measurements
