# Copyright (c) alleepy contributors. All rights reserved.
# Licensed under the MIT license.

import unittest

import numpy as np

from fixtures import INTERVAL, UNIT_SQUARE, parabola, square_bump, unequal_bumps

import alleepy as ap


def _gaussian(grid: ap.Grid, center, height: float, width: float) -> np.ndarray:
    distance = np.sum((grid.centers() - np.asarray(center)) ** 2, axis=-1)
    return height * np.exp(-distance / width**2)


class TestMeasureSpikes(unittest.TestCase):
    def test_gaussian_on_interval(self):
        grid = ap.Grid.create([-1.0], [1.0], [1024])
        maxima = ap.find_maxima(parabola(), INTERVAL)
        [spike] = ap.measure_spikes(_gaussian(grid, [0.0], 2.0, 0.1), grid, maxima)
        dx = grid.spacing[0]
        self.assertFalse(spike.off)
        self.assertAlmostEqual(spike.height, 2.0, delta=1e-3)
        self.assertAlmostEqual(spike.offset, dx / 2, delta=1e-12)
        self.assertAlmostEqual(spike.half_width, 0.1, delta=1e-3)

    def test_gaussian_on_square(self):
        grid = ap.Grid.create([0.0, 0.0], [1.0, 1.0], [128, 128])
        maxima = ap.find_maxima(square_bump(), UNIT_SQUARE)
        [spike] = ap.measure_spikes(_gaussian(grid, [0.5, 0.5], 1.5, 0.1), grid, maxima)
        self.assertAlmostEqual(spike.height, 1.5, delta=1e-3)
        self.assertAlmostEqual(spike.half_width, 0.1, delta=2e-3)
        self.assertLess(spike.offset, grid.spacing[0])

    def test_two_sites(self):
        grid = ap.Grid.create([-1.0], [1.0], [512])
        maxima = ap.find_maxima(unequal_bumps(), INTERVAL)
        field = _gaussian(grid, [0.5], 1.0, 0.1) + _gaussian(grid, [-0.5], 0.3, 0.05)
        high, low = ap.measure_spikes(field, grid, maxima)
        self.assertAlmostEqual(high.height, 1.0, delta=1e-3)
        self.assertAlmostEqual(low.height, 0.3, delta=1e-3)
        self.assertAlmostEqual(high.half_width, 0.1, delta=2e-3)
        self.assertAlmostEqual(low.half_width, 0.05, delta=2e-3)
        self.assertAlmostEqual(float(high.center[0]), 0.5, delta=1e-6)

    def test_off_site(self):
        grid = ap.Grid.create([-1.0], [1.0], [256])
        maxima = ap.find_maxima(unequal_bumps(), INTERVAL)
        high, low = ap.measure_spikes(_gaussian(grid, [0.5], 1.0, 0.1), grid, maxima)
        self.assertFalse(high.off)
        self.assertTrue(low.off)
        self.assertTrue(np.isnan(low.half_width))

    def test_wide_field_has_no_half_width(self):
        grid = ap.Grid.create([-1.0], [1.0], [64])
        [spike] = ap.measure_spikes(np.ones(grid.shape), grid, ap.find_maxima(parabola(), INTERVAL))
        self.assertEqual(spike.height, 1.0)
        self.assertTrue(np.isnan(spike.half_width))

    def test_invalid(self):
        grid = ap.Grid.create([-1.0], [1.0], [64])
        maxima = ap.find_maxima(parabola(), INTERVAL)
        with self.assertRaises(ValueError):
            ap.measure_spikes(np.ones(grid.shape), grid, [])
        with self.assertRaises(ValueError):
            field = np.ones(grid.shape)
            field[3] = np.nan
            ap.measure_spikes(field, grid, maxima)


if __name__ == "__main__":
    unittest.main()
