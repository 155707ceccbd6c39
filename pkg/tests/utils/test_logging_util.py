import os

import numpy as np

from tests.base_test import BaseTest, TempDir


class CsvTest(BaseTest):

    def test_write_and_read(self):
        from pyconic.utils.logging_util import FileFormats, read_artifact, store_artifact

        # --- setup ---
        rows = [{"t": 0.1 * i, "mass_plus": 1.0 / 3.0 + i, "mass_minus": np.float64(2.0 ** -40)} for i in range(4)]
        with TempDir() as tmp:
            path = store_artifact(os.path.join(tmp.path, "nested"), "summary", rows, FileFormats.csv)
            with open(path) as fd:
                header = fd.readline().strip()
            table = read_artifact(path)

            # --- asserts ---
            self.assertTrue(path.endswith("summary.csv"))
            self.assertEqual(header, "t,mass_plus,mass_minus")
            self.assertEqual(list(table["mass_plus"]), [r["mass_plus"] for r in rows])
            self.assertEqual(table["mass_minus"][2], 2.0 ** -40)

    def test_deterministic(self):
        from pyconic.utils.logging_util import FileFormats, store_artifact

        # --- setup ---
        rows = [{"eta2": e, "a": np.exp(-np.pi * e ** 2)} for e in np.linspace(-1.0, 1.0, 5)]
        with TempDir() as tmp:
            first = store_artifact(os.path.join(tmp.path, "a"), "lz", rows, FileFormats.csv)
            second = store_artifact(os.path.join(tmp.path, "b"), "lz", rows, "csv")
            with open(first, "rb") as fd:
                content = fd.read()
            with open(second, "rb") as fd:

                # --- asserts ---
                self.assertEqual(content, fd.read())

    def test_invalid_rows(self):
        from pyconic.exceptions import ConicValidationError
        from pyconic.utils.logging_util import FileFormats, store_artifact

        with TempDir() as tmp:
            with self.assertRaises(ConicValidationError):
                store_artifact(tmp.path, "empty", [], FileFormats.csv)
            with self.assertRaises(ConicValidationError):
                store_artifact(tmp.path, "ragged", [{"t": 0.0}, {"s": 1.0}], FileFormats.csv)
            with self.assertRaises(ConicValidationError):
                store_artifact(tmp.path, "unknown", [{"t": 0.0}], "xlsx")


class JsonTest(BaseTest):

    def test_numpy_and_complex_values(self):
        from pyconic.potential.eigen import Mode
        from pyconic.utils.logging_util import FileFormats, read_artifact, store_artifact

        # --- setup ---
        data = {"mode": Mode.plus, "q": np.array([1.0, 2.0]), "b": 1.0 + 2.0j, "n": np.int64(3), 4: (1, 2)}
        with TempDir() as tmp:
            read = read_artifact(store_artifact(tmp.path, "report", data, FileFormats.json))

        # --- asserts ---
        self.assertEqual(read, {"mode": "plus", "q": [1.0, 2.0], "b": [1.0, 2.0], "n": 3, "4": [1, 2]})


class BinaryTest(BaseTest):

    def test_field_dump(self):
        from pyconic.ansatz.grid import PhysicalGrid
        from pyconic.reference.field import Field2
        from pyconic.utils.logging_util import FileFormats, read_artifact, store_artifact

        # --- setup ---
        grid = PhysicalGrid(2, 0.1, extent=1.0, points=8)
        values = np.arange(2 * 64).reshape(2, 8, 8) * (1.0 - 0.5j)
        field = Field2(grid, values, time=0.25)
        with TempDir() as tmp:
            path = store_artifact(tmp.path, "psi", field, FileFormats.bin)
            size = os.path.getsize(path)
            read, sidecar = read_artifact(path)

        # --- asserts ---
        self.assertEqual(size, 2 * 64 * 16)
        self.assertEqual(read.shape, (2, 8, 8))
        self.assertAllClose(read, values, atol=0.0)
        self.assertEqual(sidecar["components"], 2)
        self.assertEqual(sidecar["time"], 0.25)

    def test_profile_dump(self):
        from pyconic.profile.grid import gaussian_profile
        from pyconic.utils.logging_util import FileFormats, read_artifact, store_artifact

        # --- setup ---
        profile = gaussian_profile(2, extent=6.0, points=16, mode="minus")
        with TempDir() as tmp:
            read, sidecar = read_artifact(store_artifact(tmp.path, "u", profile, FileFormats.bin))

        # --- asserts ---
        self.assertEqual(read.shape, (16, 16))
        self.assertAllClose(read, profile.values, atol=0.0)
        self.assertEqual(sidecar["mode"], "minus")
        self.assertEqual(sidecar["L"], 6.0)
