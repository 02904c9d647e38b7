# Copyright (c) alleepy contributors. All rights reserved.
# Licensed under the MIT license.

import unittest
from pathlib import Path

import numpy as np

from fixtures import temp_directory

import alleepy as ap
from alleepy._files import table_from_file, table_to_file


class TestSnapshotFiles(unittest.TestCase):
    def test_interval(self):
        grid = ap.Grid.create([-1.0], [1.0], [32])
        rng = np.random.default_rng(12345)
        u = rng.uniform(0.0, 2.0, size=grid.shape)
        with temp_directory() as directory:
            path = str(Path(directory) / "snapshot.csv")
            ap.snapshot_to_file(path, grid, u)
            self.assertEqual(Path(path).read_text().splitlines()[0], "x,u")
            table = ap.snapshot_from_file(path)
        self.assertEqual(table.coordinates.shape, (32, 1))
        self.assertEqual(set(table.fields), {"u"})
        np.testing.assert_array_equal(table.fields["u"], u)
        np.testing.assert_array_equal(table.coordinates[:, 0], grid.axis_centers()[0])

    def test_square_with_two_species(self):
        grid = ap.Grid.create([0.0, 0.0], [1.0, 2.0], [16, 20])
        rng = np.random.default_rng(12345)
        u = rng.uniform(0.0, 2.0, size=grid.shape)
        v = rng.uniform(0.0, 2.0, size=grid.shape)
        with temp_directory() as directory:
            path = str(Path(directory) / "snapshot.csv")
            ap.snapshot_to_file(path, grid, u, v)
            self.assertEqual(Path(path).read_text().splitlines()[0], "x,y,u,v")
            table = ap.snapshot_from_file(path)
        self.assertEqual(table.coordinates.shape, (320, 2))
        np.testing.assert_array_equal(table.fields["u"].reshape(grid.shape), u)
        np.testing.assert_array_equal(table.fields["v"].reshape(grid.shape), v)
        # x varies slowest
        np.testing.assert_array_equal(table.coordinates[:20, 0], grid.axis_centers()[0][0])
        np.testing.assert_array_equal(table.coordinates[:20, 1], grid.axis_centers()[1])

    def test_wrong_size(self):
        grid = ap.Grid.create([-1.0], [1.0], [32])
        with temp_directory() as directory:
            with self.assertRaises(ValueError):
                ap.snapshot_to_file(str(Path(directory) / "snapshot.csv"), grid, np.ones(31))
            with self.assertRaises(ValueError):
                ap.snapshot_from_file(str(Path(directory) / "missing.csv"))


class TestDiagnosticsFiles(unittest.TestCase):
    def test_written_from_a_run(self):
        grid = ap.Grid.create([-1.0], [1.0], [32])
        trajectory = ap.run_transient(
            grid,
            ap.Potential.quadratic(1.0, [0.0], [2.0]),
            2.0,
            1.0,
            ap.ReactionSpec.cubic_allee(0.3),
            np.full(grid.shape, 0.5),
            ap.Schedule(t_end=0.5),
        )
        with temp_directory() as directory:
            path = str(Path(directory) / "diagnostics.csv")
            ap.diagnostics_to_file(path, trajectory.diagnostics)
            self.assertEqual(Path(path).read_text().splitlines()[0], "t,mass,umax,umin,reaction_integral,dt")
            loaded = ap.diagnostics_from_file(path)
        for name in ap.Diagnostics._fields:
            with self.subTest(column=name):
                np.testing.assert_array_equal(getattr(loaded, name), getattr(trajectory.diagnostics, name))

    def test_header_is_checked(self):
        with temp_directory() as directory:
            path = Path(directory) / "diagnostics.csv"
            path.write_text("t,mass,umax\n0,1,1\n")
            with self.assertRaises(ValueError):
                ap.diagnostics_from_file(str(path))


class TestTables(unittest.TestCase):
    def test_mixed_values(self):
        with temp_directory() as directory:
            path = str(Path(directory) / "table.csv")
            table_to_file(path, ["site", "branch", "height"], [[0, "tall", 0.1], [1, "off", np.float64(1 / 3)]])
            header, rows = table_from_file(path)
        self.assertEqual(header, ("site", "branch", "height"))
        self.assertEqual(rows[0], ("0", "tall", "0.10000000000000001"))
        self.assertEqual(float(rows[1][2]), 1 / 3)

    def test_row_length_is_checked(self):
        with temp_directory() as directory:
            with self.assertRaises(ValueError):
                table_to_file(str(Path(directory) / "table.csv"), ["a", "b"], [[1]])


if __name__ == "__main__":
    unittest.main()
