# Copyright (c) alleepy contributors. All rights reserved.
# Licensed under the MIT license.

import io
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path
from unittest import mock

import numpy as np

from fixtures import CONFIG_DIRECTORY, shipped_config, shipped_config_names, temp_directory

import alleepy as ap
from alleepy._cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main
from alleepy._harness import _Context, evaluate_template

SMALL_SPIKE = """
[experiment]
mode = simulate

[potential]
kind = quadratic
peak = 1
location = 0
curvatures = 2

[domain]
lower = -1
upper = 1
cells = 128

[physics]
chi = 20
theta = 0.3

[initial]
u = pattern(tall)

[schedule]
t_end = 400
snapshots = 0, 1
"""


def _manifest(directory: str):
    lines = (Path(directory) / "MANIFEST").read_text().splitlines()
    return lines[0], lines[1:]


class TestAnalyze(unittest.TestCase):
    def test_single_spike(self):
        with temp_directory() as directory:
            result = ap.run_experiment(ap.parse_config(shipped_config("interval-spike.cfg")), directory)
            state, files = _manifest(directory)
            self.assertTrue((Path(directory) / "analysis.csv").is_file())
        self.assertEqual(state, "state: complete")
        self.assertEqual(files, ["analysis.csv"])
        self.assertEqual(result.state, "complete")
        self.assertAlmostEqual(result.summary["c01"], 1.1339, delta=5e-5)
        self.assertAlmostEqual(result.summary["c02"], 0.4582, delta=5e-5)
        self.assertEqual(result.summary["verdict"], "linearly-stable")
        self.assertTrue(result.summary["h1_ok"])

    def test_two_species_tables(self):
        text = shipped_config("interval-spike.cfg").replace("\ntheta = 0.3\n", "\ntheta = 0.1\nspeed = 2\n")
        with temp_directory() as directory:
            result = ap.run_experiment(ap.parse_config(text), directory)
            _, files = _manifest(directory)
        self.assertIn("coexistence.csv", files)
        self.assertNotIn("ifd.csv", files)
        self.assertIn("coexistence_roots", result.summary)

    def test_resource_table(self):
        with temp_directory() as directory:
            result = ap.run_experiment(ap.parse_config(shipped_config("ifd-small-threshold.cfg"), "analyze"), directory)
            _, files = _manifest(directory)
        self.assertIn("ifd.csv", files)
        self.assertGreater(result.summary["epsilon_star"], 0)

    def test_no_maximum_fails(self):
        text = shipped_config("interval-spike.cfg").replace("location = 0.0", "location = 3.0")
        with temp_directory() as directory:
            with self.assertRaises(ValueError):
                ap.run_experiment(ap.parse_config(text), directory)
            state, files = _manifest(directory)
        self.assertEqual(state, "state: failed")
        self.assertEqual(files, [])


class TestTemplates(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.config = ap.parse_config(SMALL_SPIKE)
        cls.grid = cls.config.domain.grid()

    def test_terms_add_up(self):
        with temp_directory() as directory:
            context = _Context(self.config, Path(directory))
            field = evaluate_template("constant(0.5) + gaussian-bump(2, 10) + cosine-of-square(0.1, pi)", self.grid, context)
        x = self.grid.axis_centers()[0]
        np.testing.assert_allclose(field, 0.5 + 2 * np.exp(-10 * x**2) + 0.1 * np.cos(np.pi * x**2), rtol=1e-14)

    def test_cosine_with_phase(self):
        with temp_directory() as directory:
            context = _Context(self.config, Path(directory))
            field = evaluate_template("constant-plus-cosine(3, 1, 2, 1)", self.grid, context)
        x = self.grid.axis_centers()[0]
        np.testing.assert_allclose(field, 3 + np.cos(2 * x + 1), rtol=1e-14)

    def test_negative_sums_are_clipped(self):
        with temp_directory() as directory:
            context = _Context(self.config, Path(directory))
            field = evaluate_template("gaussian-bump(0.46, 500) + constant-plus-cosine(0, 0.01, 2)", self.grid, context)
        x = self.grid.axis_centers()[0]
        expected = 0.46 * np.exp(-500 * x**2) + 0.01 * np.cos(2 * x)
        self.assertLess(float(expected.min()), 0)
        np.testing.assert_allclose(field, np.maximum(expected, 0.0), rtol=1e-14)
        self.assertTrue(np.all(field[np.abs(x) > np.pi / 4 + 0.05] == 0.0))

    def test_pattern(self):
        with temp_directory() as directory:
            context = _Context(self.config, Path(directory))
            field = evaluate_template("pattern(tall)", self.grid, context)
        self.assertAlmostEqual(float(field.max()), ap.spike_heights(1, 0.3).c01, delta=1e-2)
        self.assertLess(float(field[0]), 1e-3)

    def test_offset_center_in_two_dimensions(self):
        config = ap.parse_config(shipped_config("square-spike.cfg").replace("cells = 128, 128", "cells = 32, 32"))
        grid = config.domain.grid()
        with temp_directory() as directory:
            context = _Context(config, Path(directory))
            field = evaluate_template("gaussian-bump(1, 5, 0.25, 0.75)", grid, context)
            with self.assertRaises(ValueError):
                evaluate_template("gaussian-bump(1, 5, 0.25)", grid, context)
        x, y = grid.axis_centers()
        expected = np.exp(-5 * ((x[:, None] - 0.25) ** 2 + (y[None, :] - 0.75) ** 2))
        np.testing.assert_allclose(field, expected, rtol=1e-14)


class TestSimulate(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.outputs = []
        cls.results = []
        for _ in range(2):
            with temp_directory() as directory:
                result = ap.run_experiment(ap.parse_config(SMALL_SPIKE), directory)
                cls.results.append(result)
                cls.outputs.append(
                    {name: (Path(directory) / name).read_bytes() for name in result.files + ["MANIFEST"]}
                )

    def test_comparison(self):
        result = self.results[0]
        self.assertEqual(result.summary["termination"], "steady")
        [row] = result.report.rows
        self.assertEqual(row.species, "u")
        self.assertEqual(row.center, (0.0,))
        self.assertLess(row.height_error, 0.25)
        self.assertLess(row.measured_eigenvalue, 0)
        self.assertEqual(row.predicted_verdict, "linearly-stable")
        self.assertEqual(row.observed_verdict, "linearly-stable")

    def test_artifacts(self):
        names = self.results[0].files
        self.assertIn("diagnostics.csv", names)
        self.assertIn("comparison.csv", names)
        self.assertTrue(names[0].startswith("snapshot_0000_t0"))
        self.assertEqual(len([n for n in names if n.startswith("snapshot_")]), 3)
        self.assertTrue(self.outputs[0]["MANIFEST"].startswith(b"state: complete\n"))

    def test_runs_are_reproducible(self):
        self.assertEqual(self.outputs[0].keys(), self.outputs[1].keys())
        for name in self.outputs[0]:
            with self.subTest(file=name):
                self.assertEqual(self.outputs[0][name], self.outputs[1][name])

    def test_eig_mode(self):
        with temp_directory() as directory:
            result = ap.run_experiment(ap.parse_config(SMALL_SPIKE, "eig"), directory)
            header, *rows = (Path(directory) / "spectrum.csv").read_text().splitlines()
        self.assertEqual(header, "index,eigenvalue")
        self.assertEqual(len(rows), ap.defaults.EIGEN_COUNT)
        self.assertIn("eigenvector_00.csv", result.files)
        self.assertLess(result.summary["leading_eigenvalue"], 0)


class TestSpikeDynamics(unittest.TestCase):
    def test_heights_hold_while_spikes_narrow(self):
        base = ap.parse_config(shipped_config("chi-sweep.cfg"))
        rows = {}
        for chi in ("10", "70"):
            config = base.with_parameter("physics.chi", chi)
            config = config._replace(domain=config.domain._replace(cells=(2048,)))
            with temp_directory() as directory:
                result = ap.run_experiment(config, directory)
            rows[chi] = result.report.rows[0]
        tall = ap.spike_heights(1, 0.3).c01
        for chi, row in rows.items():
            with self.subTest(chi=chi):
                self.assertAlmostEqual(row.measured_height, tall, delta=0.02 * tall)
        ratio = rows["70"].half_width / rows["10"].half_width
        self.assertAlmostEqual(ratio, np.sqrt(10 / 70), delta=0.12 * np.sqrt(10 / 70))

    def test_leading_eigenvalue_matches_mean_field(self):
        config = ap.parse_config(shipped_config("chi-sweep-eig.cfg").replace("cells = 4096", "cells = 1024"))
        with temp_directory() as directory:
            result = ap.run_experiment(config, directory)
        [row] = result.report.rows
        self.assertEqual(result.summary["termination"], "steady")
        self.assertLess(row.measured_eigenvalue, 0)
        self.assertAlmostEqual(
            row.measured_eigenvalue, row.predicted_eigenvalue, delta=0.05 * abs(row.predicted_eigenvalue)
        )

    def test_short_spike_is_left_behind(self):
        config = ap.parse_config(shipped_config("short-spike.cfg").replace("cells = 4096", "cells = 1024"))
        with temp_directory() as directory:
            result = ap.run_experiment(config, directory)
        height = result.summary["height_0"]
        tall = ap.spike_heights(1, 0.3).c01
        self.assertFalse(0.4 <= height <= 0.52, f"height {height} stayed near the short spike")
        self.assertTrue(abs(height - tall) <= 0.02 * tall or height < 1e-3, f"height {height}")


class TestCompete(unittest.TestCase):
    def test_small_threshold_favours_the_ideal_free_species(self):
        config = ap.parse_config(shipped_config("ifd-small-threshold.cfg").replace("cells = 4096", "cells = 512"))
        with temp_directory() as directory:
            result = ap.run_experiment(config, directory)
        grid = config.domain.grid()
        potential = config.potential.to_potential()
        u_initial = grid.integrate(1.9947114020071635 * np.exp(-grid.centers()[..., 0] ** 2))
        self.assertEqual(result.state, "complete")
        self.assertLess(result.summary["u_mass"], 1e-2 * u_initial)
        # v alone matches the resource: it follows ln r at unit rate
        resource = np.exp(potential.value(grid.centers()))
        self.assertAlmostEqual(result.summary["v_mass"], grid.integrate(resource), delta=0.05 * grid.integrate(resource))
        self.assertAlmostEqual(result.summary["v_height_0"], resource.max(), delta=0.05 * resource.max())
        self.assertGreater(result.summary["v_mass_ratio"], 1)


class TestShippedConfigs(unittest.TestCase):
    def test_every_config_runs_at_reduced_scale(self):
        for name in shipped_config_names():
            with self.subTest(config=name):
                config = ap.parse_config(shipped_config(name))
                cells = (256,) if len(config.domain.lower) == 1 else (32, 32)
                schedule = config.schedule
                if schedule.t_end is not None:
                    schedule = schedule._replace(t_end=min(schedule.t_end, 1.0))
                config = config._replace(domain=config.domain._replace(cells=cells), schedule=schedule)
                with temp_directory() as directory:
                    result = ap.run_experiment(config, directory)
                    state, _ = _manifest(directory)
                self.assertEqual(result.state, "complete")
                self.assertEqual(state, "state: complete")


class TestSweep(unittest.TestCase):
    def test_analyze_sweep(self):
        text = shipped_config("interval-spike.cfg").replace("mode = analyze", "mode = sweep")
        text += "\n[sweep]\nmode = analyze\nphysics.theta = 0.1, 0.2, 0.3\n"
        with temp_directory() as directory:
            result = ap.run_experiment(ap.parse_config(text), directory)
            header, *rows = (Path(directory) / "summary.csv").read_text().splitlines()
            state, files = _manifest(directory)
            self.assertTrue((Path(directory) / "run_002" / "config.cfg").is_file())
            self.assertTrue((Path(directory) / "run_002" / "analysis.csv").is_file())
        self.assertEqual(result.state, "complete")
        self.assertEqual(state, "state: complete")
        self.assertEqual(files[0], "summary.csv")
        self.assertEqual(header, "run,state,physics.theta,termination,height_0,half_width_0,leading_eigenvalue,verdict")
        self.assertEqual(len(rows), 3)
        heights = [float(row.split(",")[4]) for row in rows]
        self.assertAlmostEqual(heights[2], ap.spike_heights(1, 0.3).c01, delta=1e-12)
        # taller spikes for lower thresholds
        self.assertGreater(heights[0], heights[1])
        self.assertGreater(heights[1], heights[2])


class TestCommandLine(unittest.TestCase):
    def _main(self, *args: str):
        stdout, stderr = io.StringIO(), io.StringIO()
        with mock.patch("sys.argv", ["alleepy", *args]), redirect_stdout(stdout), redirect_stderr(stderr):
            code = main()
        return code, stdout.getvalue(), stderr.getvalue()

    def test_analyze(self):
        with temp_directory() as directory:
            code, stdout, _ = self._main("analyze", str(CONFIG_DIRECTORY / "interval-spike.cfg"), f"--out={directory}")
            self.assertTrue((Path(directory) / "MANIFEST").is_file())
        self.assertEqual(code, EXIT_OK)
        self.assertIn("c01", stdout)

    def test_invalid_config(self):
        with temp_directory() as directory:
            path = Path(directory) / "bad.cfg"
            path.write_text(shipped_config("interval-spike.cfg").replace("\nchi = 10\n", "\nchi = -3\n"))
            code, _, stderr = self._main("analyze", str(path), f"--out={directory}")
        self.assertEqual(code, EXIT_CONFIG)
        self.assertIn("physics.chi", stderr)

    def test_missing_config(self):
        with temp_directory() as directory:
            code, _, _ = self._main("analyze", str(Path(directory) / "missing.cfg"))
        self.assertEqual(code, EXIT_CONFIG)

    def test_partial_sweep_is_a_runtime_failure(self):
        text = shipped_config("interval-spike.cfg").replace("mode = analyze", "mode = sweep")
        text += "\n[sweep]\nmode = analyze\npotential.location = 0.0, 3.0\n"
        with temp_directory() as directory:
            path = Path(directory) / "sweep.cfg"
            path.write_text(text)
            out = Path(directory) / "out"
            code, _, stderr = self._main("sweep", str(path), f"--out={out}")
            _, *rows = (out / "summary.csv").read_text().splitlines()
            state, _ = _manifest(str(out))
        self.assertEqual(code, EXIT_RUNTIME)
        self.assertEqual([row.split(",")[1] for row in rows], ["complete", "failed"])
        self.assertEqual(state, "state: partial")
        self.assertIn("partial", stderr)

    def test_seed_grid_is_checked(self):
        with temp_directory() as directory:
            code, _, _ = self._main("analyze", str(CONFIG_DIRECTORY / "interval-spike.cfg"), f"--out={directory}", "--seed-grid=2")
        self.assertEqual(code, EXIT_CONFIG)


if __name__ == "__main__":
    unittest.main()
