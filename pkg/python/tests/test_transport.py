# Copyright (c) alleepy contributors. All rights reserved.
# Licensed under the MIT license.

import unittest

import numpy as np

from fixtures import single_bump, square_bump

import alleepy as ap


class TestBernoulli(unittest.TestCase):
    def test_values(self):
        self.assertEqual(float(ap.bernoulli(0.0)), 1.0)
        x = np.linspace(-30, 30, 61)
        np.testing.assert_allclose(ap.bernoulli(x) - ap.bernoulli(-x), -x, atol=1e-12)
        np.testing.assert_allclose(ap.bernoulli(x[x != 0]), x[x != 0] / np.expm1(x[x != 0]), rtol=1e-14)

    def test_extremes(self):
        self.assertEqual(float(ap.bernoulli(1e4)), 0.0)
        self.assertAlmostEqual(float(ap.bernoulli(-1e4)), 1e4, delta=1e-8)


class TestTransportOperator(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.grid = ap.Grid.create([-1.0], [1.0], [1024])
        cls.square = ap.Grid.create([0.0, 0.0], [1.0, 1.0], [32, 24])

    def test_columns_sum_to_zero(self):
        for grid, potential in ((self.grid, single_bump()), (self.square, square_bump())):
            with self.subTest(dimension=grid.dimension):
                operator = ap.assemble_transport(grid, potential, chi=30.0)
                columns = np.asarray(operator.matrix.sum(axis=0)).ravel()
                np.testing.assert_allclose(columns, 0.0, atol=1e-9 * operator.norm())

    def test_equilibrium_in_kernel(self):
        for grid, potential in ((self.grid, single_bump()), (self.square, square_bump())):
            with self.subTest(dimension=grid.dimension):
                operator = ap.assemble_transport(grid, potential, chi=30.0)
                residual = operator.apply(operator.equilibrium())
                self.assertLess(float(np.max(np.abs(residual))), 1e-9 * operator.norm())

    def test_equilibrium_preserved_by_implicit_steps(self):
        for chi in (1.0, 10.0, 100.0, 200.0):
            with self.subTest(chi=chi):
                operator = ap.assemble_transport(self.grid, single_bump(), chi)
                expected = operator.equilibrium()
                u = expected.copy()
                for _ in range(10_000):
                    u = operator.implicit_step(u, 1e-4)
                error = float(np.max(np.abs(u - expected)) / np.max(expected))
                self.assertLessEqual(error, 1e-11)

    def test_implicit_step_conserves_mass(self):
        operator = ap.assemble_transport(self.square, square_bump(), chi=20.0)
        rng = np.random.default_rng(12345)
        u = rng.uniform(0.0, 2.0, size=self.square.shape)
        mass = self.square.integrate(u)
        for dt in (0.1, 0.05, 0.1):
            u = operator.implicit_step(u, dt)
            self.assertAlmostEqual(self.square.integrate(u), mass, delta=1e-12 * mass)
        self.assertGreaterEqual(float(u.min()), 0.0)

    def test_pure_diffusion_stencil(self):
        operator = ap.assemble_transport(self.grid, single_bump(), chi=0.0, d=2.0)
        dx = self.grid.spacing[0]
        matrix = operator.matrix.toarray()
        self.assertAlmostEqual(matrix[10, 11], 2.0 / dx**2, delta=1e-6)
        self.assertAlmostEqual(matrix[10, 10], -4.0 / dx**2, delta=1e-6)
        self.assertAlmostEqual(matrix[0, 0], -2.0 / dx**2, delta=1e-6)

    def test_symmetrized(self):
        operator = ap.assemble_transport(self.square, square_bump(), chi=20.0)
        symmetric, scale = operator.symmetrized()
        self.assertLess(abs(symmetric - symmetric.T).max(), 1e-9)
        # S W^(-1/2) = W^(-1/2) L
        inverse = 1 / scale.ravel()
        rebuilt = symmetric.toarray() * inverse[None, :]
        expected = inverse[:, None] * operator.matrix.toarray()
        np.testing.assert_allclose(rebuilt, expected, rtol=1e-9, atol=0)

    def test_invalid(self):
        with self.assertRaises(ValueError):
            ap.assemble_transport(self.grid, square_bump(), chi=1.0)
        with self.assertRaises(ValueError):
            ap.assemble_transport(self.grid, single_bump(), chi=-1.0)
        with self.assertRaises(ValueError):
            ap.assemble_transport(self.grid, single_bump(), chi=1.0, d=0.0)
        with self.assertRaises(ValueError):
            ap.Grid.create([0.0], [1.0], [4])


if __name__ == "__main__":
    unittest.main()
