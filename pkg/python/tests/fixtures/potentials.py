# Copyright (c) alleepy contributors. All rights reserved.
# Licensed under the MIT license.

import numpy as np

import alleepy as ap

BUMP_AMPLITUDE = 5.0 / np.sqrt(2.0 * np.pi)
INTERVAL = ap.Box((-1.0,), (1.0,))
UNIT_SQUARE = ap.Box((0.0, 0.0), (1.0, 1.0))


def parabola() -> ap.Potential:
    """`1 - x^2`"""
    return ap.Potential.quadratic(1.0, [0.0], [2.0])


def single_bump() -> ap.Potential:
    """`5/sqrt(2 pi) exp(-25 x^2)`"""
    return ap.Potential.gaussian_sum([BUMP_AMPLITUDE], [[0.0]], [0.2])


def unequal_bumps() -> ap.Potential:
    """A higher bump at `x = 0.5` and one half as high at `x = -0.5`."""
    return ap.Potential.gaussian_sum([BUMP_AMPLITUDE, BUMP_AMPLITUDE / 2], [[0.5], [-0.5]], [0.2, 0.2])


def square_bump() -> ap.Potential:
    """`5/sqrt(2 pi) exp(-25 |x - (1/2, 1/2)|^2)`"""
    return ap.Potential.gaussian_sum([BUMP_AMPLITUDE], [[0.5, 0.5]], [0.2])
