# Copyright (c) alleepy contributors. All rights reserved.
# Licensed under the MIT license.

from .potentials import (
    BUMP_AMPLITUDE,
    INTERVAL,
    UNIT_SQUARE,
    parabola,
    single_bump,
    square_bump,
    unequal_bumps,
)
from .workspace import CONFIG_DIRECTORY, random_points, shipped_config, shipped_config_names, temp_directory
