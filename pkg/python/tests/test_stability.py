# Copyright (c) alleepy contributors. All rights reserved.
# Licensed under the MIT license.

import unittest

import numpy as np

from fixtures import INTERVAL, parabola, single_bump, unequal_bumps

import alleepy as ap


class TestReducedBalance(unittest.TestCase):
    def test_heights_are_roots(self):
        for n in (1, 2):
            pair = ap.spike_heights(n, 0.2)
            for c in (0.0, pair.c01, pair.c02):
                with self.subTest(n=n, c=c):
                    self.assertAlmostEqual(ap.h_eval(n, 0.2, c).h, 0.0, delta=1e-12)

    def test_slope_signs(self):
        for n in (1, 2):
            for theta in (0.05, 0.2, 0.3):
                with self.subTest(n=n, theta=theta):
                    pair = ap.spike_heights(n, theta)
                    self.assertLess(ap.h_eval(n, theta, pair.c01).h_prime, 0)
                    self.assertGreater(ap.h_eval(n, theta, pair.c02).h_prime, 0)
                    self.assertLess(ap.h_eval(n, theta, 0.0).h_prime, 0)

    def test_slope_matches_finite_difference(self):
        step = 1e-6
        for xi in (0.1, 0.7, 1.3):
            central = (ap.h_eval(1, 0.3, xi + step).h - ap.h_eval(1, 0.3, xi - step).h) / (2 * step)
            self.assertAlmostEqual(ap.h_eval(1, 0.3, xi).h_prime, central, delta=1e-8)


class TestClassifyPattern(unittest.TestCase):
    def test_tall_stable_short_unstable(self):
        maxima = ap.find_maxima(parabola(), INTERVAL)
        tall = ap.classify_pattern(ap.build_pattern(maxima, ["tall"], chi=10, theta=0.3, n=1))
        short = ap.classify_pattern(ap.build_pattern(maxima, ["short"], chi=10, theta=0.3, n=1))
        self.assertEqual(tall.verdict, "linearly-stable")
        self.assertEqual(short.verdict, "unstable")
        self.assertAlmostEqual(tall.sites[0].lambda_leading, -0.6113, delta=5e-4)
        self.assertAlmostEqual(tall.alpha0, 1 / np.sqrt(np.pi), delta=1e-15)

    def test_mean_field(self):
        maxima = ap.find_maxima(unequal_bumps(), INTERVAL)
        report = ap.classify_pattern(ap.build_pattern(maxima, ["tall", "off"], chi=10, theta=0.3, n=1))
        self.assertEqual(report.verdict, "linearly-stable")
        tall, off = report.sites
        self.assertAlmostEqual(off.lambda_mean_field, -0.3, delta=1e-14)
        self.assertAlmostEqual(tall.lambda_mean_field, tall.h_prime / np.sqrt(6), delta=1e-14)
        self.assertEqual(off.verdict, "linearly-stable")

    def test_any_short_site_is_unstable(self):
        maxima = ap.find_maxima(unequal_bumps(), INTERVAL)
        for branches in (["tall", "short"], ["short", "tall"], ["short", "off"]):
            with self.subTest(branches=branches):
                report = ap.classify_pattern(ap.build_pattern(maxima, branches, chi=10, theta=0.3, n=1))
                self.assertEqual(report.verdict, "unstable")


def _exp_bump(points: np.ndarray) -> np.ndarray:
    return np.exp(single_bump().value(points))


class TestIdealFree(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.maxima = ap.find_maxima(single_bump(), INTERVAL)

    def test_report(self):
        with self.assertWarns(UserWarning):
            report = ap.ifd_equilibria_report(1, 0.03, _exp_bump, INTERVAL, self.maxima, chi=20, nodes=512)
        self.assertEqual(report.zero_resource.verdict, "linearly-stable")
        # r >= 1 everywhere, so int r^2 < int r^3 and the scaled family comes out negative
        self.assertLess(report.beta, 1)
        self.assertLess(report.scaled_resource.eigenvalue, 0)
        self.assertEqual(len(report.scaled_resource.notes), 1)
        plateau = float(np.exp(self.maxima[0].value))
        self.assertAlmostEqual(report.pattern.sites[0].height, ap.spike_heights(1, 0.03, plateau).c01, delta=1e-12)
        self.assertLess(report.psi_eigenvalue, 0)
        # theta = 0.03 is below the invasion bound at chi = 20, so the directed spike loses to the ideal free species
        self.assertLess(0.03, report.threshold.epsilon_star / np.sqrt(20))
        self.assertEqual(report.directed_spikes.verdict, "unstable")
        self.assertEqual(len(report.directed_spikes.notes), 1)

    def test_small_theta_override(self):
        theta = 1e-6
        with self.assertWarns(UserWarning):
            report = ap.ifd_equilibria_report(1, theta, _exp_bump, INTERVAL, self.maxima, chi=20, nodes=512)
        if theta < report.threshold.epsilon_star / np.sqrt(20):
            self.assertEqual(report.directed_spikes.verdict, "unstable")
            self.assertEqual(len(report.directed_spikes.notes), 1)

    def test_zero_resource_rate(self):
        report = ap.ifd_equilibria_report(1, 0.1, lambda x: np.full(len(x), 0.5), INTERVAL, self.maxima, chi=20, nodes=64)
        # (theta int r^2 - int r^3) / int r with r = 1/2 on a length 2 interval
        self.assertAlmostEqual(report.zero_resource.eigenvalue, (0.1 * 0.5 - 0.25) / 1.0, delta=1e-12)
        self.assertAlmostEqual(report.beta, 2.0, delta=1e-12)

    def test_invalid(self):
        with self.assertRaises(ValueError):
            ap.ifd_equilibria_report(1, 0.0, _exp_bump, INTERVAL, self.maxima, chi=20, nodes=64)
        with self.assertRaises(ValueError):
            ap.ifd_equilibria_report(1, 0.1, _exp_bump, INTERVAL, [], chi=20, nodes=64)


class TestCoexistence(unittest.TestCase):
    def test_determinant_polynomial(self):
        rng = np.random.default_rng(12345)
        for _ in range(100):
            n = int(rng.integers(1, 3))
            c = float(rng.uniform(1.0, 4.0))
            theta = float(rng.uniform(0.01, 0.3))
            s1, s2 = rng.uniform(0.05, 1.5, size=2)
            jacobian = ap.balancing_jacobian(n, c, theta, s1, s2)
            determinant = float(np.linalg.det(jacobian))
            expanded = ap.determinant_polynomial(n, c, theta, s1, s2)
            self.assertAlmostEqual(expanded, determinant, delta=1e-9 * max(1.0, abs(determinant)))

    def test_coexistence_roots_are_unstable(self):
        for c, theta, expected in ((2.5, 0.3, (0.7742, 0.3603)), (3.0, 0.2, (0.2325, 0.9419))):
            roots = ap.solve_coexistence(1, c, theta)
            self.assertGreater(len(roots), 0)
            self.assertTrue(
                any(abs(r.s1 - expected[0]) < 1e-3 and abs(r.s2 - expected[1]) < 1e-3 for r in roots),
                f"no root near {expected} among {[(r.s1, r.s2) for r in roots]}",
            )
            for root in roots:
                with self.subTest(c=c, theta=theta, root=root):
                    verdict = ap.coexistence_stability(1, c, theta, root)
                    self.assertEqual(verdict.verdict, "unstable")
                    self.assertTrue(verdict.determinant < 0 or verdict.trace > 0)
                    self.assertAlmostEqual(verdict.det_crosscheck, verdict.determinant, delta=1e-9)

    def test_near_equal_speeds_have_no_coexistence(self):
        self.assertEqual(ap.solve_coexistence(1, 1.02, 0.05), [])

    def test_rejects_non_roots(self):
        bogus = ap.CoexistenceRoot(0.3, 0.3, "i", (0.0, 0.0))
        with self.assertRaises(ValueError):
            ap.coexistence_stability(1, 2.0, 0.1, bogus)


if __name__ == "__main__":
    unittest.main()
