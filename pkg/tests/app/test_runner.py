import json
import os

import numpy as np

from tests.app import ADIABATIC_PLUS, CLASSICAL_ONLY, COARSE_CROSSING, COARSE_PAIR, LZ_TABLE, write_config
from tests.base_test import BaseTest, TempDir

T_FLAT = 2.0 - np.sqrt(2.0)


class SnapshotTimesTest(BaseTest):

    def test_default_times(self):
        from pyconic.app.runner import snapshot_times
        from pyconic.model.config import config_from_dict

        # --- setup ---
        config = config_from_dict({"initial": {"z0": [-1.0, 0.0, 2.0, 0.0]}, "run": {"t_end": 1.0}})
        delta = 0.02 ** (5.0 / 14.0)

        # --- asserts ---
        self.assertAllClose(snapshot_times(config, 0.02, 0.0, T_FLAT), [0.0, T_FLAT - delta, T_FLAT + delta, 1.0])
        self.assertEqual(snapshot_times(config, 0.02, 0.0), [0.0, 1.0])

    def test_configured_times(self):
        from pyconic.app.runner import snapshot_times
        from pyconic.model.config import config_from_dict

        # --- setup ---
        config = config_from_dict({"initial": {"z0": [-1.0, 0.0, 2.0, 0.0]},
                                   "run": {"times": [1.0, 0.0, 0.3, 0.3]}})

        # --- asserts ---
        self.assertEqual(snapshot_times(config, 0.02, 0.0, T_FLAT), [0.0, 0.3, 1.0])

    def test_slope(self):
        from pyconic.app.runner import fitted_slope

        # --- setup ---
        epsilons = np.array([0.02, 0.01, 0.005])

        # --- asserts ---
        self.assertAlmostEqual(fitted_slope(epsilons, 3.0 * epsilons ** 0.5), 0.5, places=10)
        self.assertTrue(np.isnan(fitted_slope(epsilons, [1.0, 0.0, 1.0])))


class ClassicalCommandTest(BaseTest):

    def test_crossing_trajectory(self):
        from pyconic.app.runner import run
        from pyconic.model.config import load_config
        from pyconic.utils.logging_util import read_artifact

        # --- setup ---
        with TempDir() as tmp:
            config = load_config(write_config(tmp.path, CLASSICAL_ONLY))
            out = os.path.join(tmp.path, "out")
            report = run("classical", config, out=out, eigenframe=True)
            names = sorted(os.listdir(out))
            incoming = read_artifact(os.path.join(out, "trajectory.csv"))
            plus = read_artifact(os.path.join(out, "trajectory_plus.csv"))
            frame = read_artifact(os.path.join(out, "eigenframe.csv"))
            with open(os.path.join(out, "report.json")) as fd:
                written = json.load(fd)

        # --- asserts ---
        self.assertEqual(names, ["eigenframe.csv", "report.json", "trajectory.csv", "trajectory_minus.csv",
                                 "trajectory_plus.csv"])
        self.assertFalse(report.failed)
        self.assertAlmostEqual(report.crossing["t_flat"], T_FLAT, places=8)
        self.assertAlmostEqual(written["crossing"]["r"], np.sqrt(2.0), places=8)
        self.assertAlmostEqual(incoming["t"][-1], T_FLAT, places=8)
        self.assertAlmostEqual(plus["t"][-1], 1.5, places=10)
        self.assertTrue(np.all(incoming["mode_sign"] == -1))
        self.assertEqual(plus["mode_sign"][-1], 1)
        self.assertAllClose(incoming["energy"], incoming["energy"][0], atol=1e-8)
        self.assertLess(report.summary["energy_drift"], 1e-8)
        self.assertLess(report.summary["eigenframe_residual"], 1e-6)
        self.assertLess(frame["t"][-1], T_FLAT)
        self.assertAllClose(frame["y1"] ** 2 + frame["y2"] ** 2, 1.0, atol=1e-8)


class LzScatterCommandTest(BaseTest):

    def test_table_and_oracle(self):
        from pyconic.app.runner import run
        from pyconic.model.config import load_config
        from pyconic.utils.logging_util import read_artifact

        # --- setup ---
        with TempDir() as tmp:
            config = load_config(write_config(tmp.path, LZ_TABLE))
            report = run("lz-scatter", config, out=tmp.path)
            table = read_artifact(os.path.join(tmp.path, "lz_scatter.csv"))

        # --- asserts ---
        self.assertFalse(report.failed)
        self.assertAllClose(table["eta2"], [-1.0, -0.5, 0.0, 0.5, 1.0])
        self.assertAllClose(table["a"], np.exp(-0.5 * np.pi * table["eta2"] ** 2), atol=1e-12)
        self.assertAllClose(table["unitarity"], 1.0, atol=1e-12)
        self.assertLessEqual(report.summary["unitarity_defect"], 1e-12)
        oracle = np.isfinite(table["probability"])
        self.assertAllClose(table["eta2"][oracle], [1.0])
        self.assertAllClose(table["oracle_s0"][oracle], [20.0])
        self.assertAllClose(table["predicted"][oracle], np.exp(-np.pi), atol=1e-12)
        self.assertTrue(np.all(table["discrepancy_2s0"][oracle] < table["discrepancy"][oracle]))
        self.assertEqual(int(np.sum(oracle)), 1)

    def test_grid_argument_wins(self):
        from pyconic.app.runner import lz_scatter
        from pyconic.model.config import config_from_dict

        # --- setup ---
        config = config_from_dict({"run": {"kind": "lz-table", "oracle_eta2": []}})
        with TempDir() as tmp:
            report = lz_scatter(config, tmp.path, eta2_grid=(0.0, 0.2, 0.1))
            names = sorted(os.listdir(tmp.path))

        # --- asserts ---
        self.assertEqual(names, ["lz_scatter.csv"])
        self.assertNotIn("oracle_relative_error", report.summary)

    def test_oracle_value_off_the_grid(self):
        from pyconic.app.runner import lz_scatter
        from pyconic.model.config import config_from_dict
        from pyconic.utils.logging_util import read_artifact

        # --- setup ---
        config = config_from_dict({"run": {"kind": "lz-table", "oracle_eta2": [0.25], "oracle_s0": 20.0}})
        with TempDir() as tmp:
            report = lz_scatter(config, tmp.path, eta2_grid=(0.0, 0.5, 0.5))
            table = read_artifact(os.path.join(tmp.path, "lz_scatter.csv"))

        # --- asserts ---
        self.assertAllClose(table["eta2"], [0.0, 0.25, 0.5])
        self.assertEqual(np.isfinite(table["probability"]).tolist(), [False, True, False])
        self.assertAllClose(table["predicted"][1], np.exp(-0.0625 * np.pi), atol=1e-12)
        self.assertIn("oracle_relative_error", report.summary)


class SimulateCommandTest(BaseTest):

    def test_adiabatic_packet(self):
        from pyconic.app.runner import run
        from pyconic.model.config import load_config
        from pyconic.utils.logging_util import read_artifact

        # --- setup ---
        with TempDir() as tmp:
            config = load_config(write_config(tmp.path, ADIABATIC_PLUS))
            report = run("simulate", config, out=tmp.path)
            errors = read_artifact(os.path.join(tmp.path, "errors_eps0.1.csv"))
            summary = read_artifact(os.path.join(tmp.path, "summary_eps0.1.csv"))
            psi, sidecar = read_artifact(os.path.join(tmp.path, "psi_reference_eps0.1.bin"))

        # --- asserts ---
        entry = report.entries[0]
        self.assertFalse(report.failed)
        self.assertEqual(entry.epsilon, 0.1)
        self.assertEqual(entry.times, [0.0, 0.2])
        self.assertAllClose(errors["t"], [0.0, 0.2])
        self.assertEqual(errors["l2"][0], 0.0)
        self.assertLess(errors["l2"][1], 0.5)
        self.assertAllClose(summary["mass_plus"], 1.0, atol=1e-8)
        self.assertAllClose(summary["mass_minus"], 0.0, atol=0.0)
        self.assertAlmostEqual(entry.reference_masses["plus"] + entry.reference_masses["minus"], 1.0, places=6)
        self.assertEqual(psi.shape, (2, 128, 128))
        self.assertEqual(sidecar["epsilon"], 0.1)
        self.assertEqual(report.summary["epsilon"], 0.1)

    def test_sweep_needs_three_values(self):
        from pyconic.app.runner import run
        from pyconic.exceptions import ConfigValidationError
        from pyconic.model.config import load_config

        # --- setup ---
        with TempDir() as tmp:
            config = load_config(write_config(tmp.path, ADIABATIC_PLUS), overrides={"run": {"epsilons": [0.1, 0.05]}})

            # --- asserts ---
            with self.assertRaises(ConfigValidationError) as cm:
                run("sweep", config, out=tmp.path)
        self.assertEqual((cm.exception.section, cm.exception.key), ("run", "epsilons"))
        self.assertIsNotNone(cm.exception.line)


def read_bytes(path):
    with open(path, "rb") as fd:
        return fd.read()


class CrossingRunTest(BaseTest):

    def run_entries(self, content, epsilons):
        from pyconic.app.runner import run_epsilon
        from pyconic.model.config import load_config

        with TempDir() as tmp:
            config = load_config(write_config(tmp.path, content))
            model = config.build_model()
            return [run_epsilon(config, model, eps, tmp.path)[0] for eps in epsilons]

    def test_single_packet_converges(self):
        # --- setup ---
        entries = self.run_entries(COARSE_CROSSING, (0.1, 0.05))
        errors = [entry.final_error for entry in entries]

        # --- asserts ---
        for entry in entries:
            self.assertEqual(entry.flags, [])
            self.assertLess(entry.l2_errors[1], 0.35)
            self.assertLess(entry.metadata["mass_deviation"], 0.05)
            self.assertAlmostEqual(sum(entry.reference_masses.values()), 1.0, places=6)
        # both outgoing packets have to be in phase with the reference
        self.assertLess(errors[0], 1.0)
        self.assertLess(errors[1], errors[0])

    def test_pair_masses(self):
        from pyconic.app.runner import mass_deviation

        # --- setup ---
        entry = self.run_entries(COARSE_PAIR, (0.1,))[0]

        # --- asserts ---
        self.assertEqual(set(entry.predicted_masses), {"plus", "minus"})
        self.assertAlmostEqual(sum(entry.reference_masses.values()), 2.0, delta=1e-4)
        self.assertAlmostEqual(sum(entry.ansatz_masses.values()), 2.0, delta=1e-4)
        # the interference of the two packets is carried by the transferred profiles
        self.assertLess(mass_deviation(entry.reference_masses, entry.ansatz_masses), 0.05)

    def test_mass_deviation(self):
        from pyconic.app.runner import mass_deviation

        # --- asserts ---
        self.assertAlmostEqual(mass_deviation({"plus": 0.38, "minus": 0.62}, {"plus": 0.4, "minus": 0.6}), 0.05)
        self.assertEqual(mass_deviation({"plus": 0.5, "minus": 0.5}, {"plus": 0.0, "minus": 1.0}), 0.5)
        self.assertEqual(mass_deviation({"plus": 1.0}, {"plus": 0.0}), 0.0)

    def test_simulate_is_deterministic(self):
        from pyconic.app.runner import run
        from pyconic.model.config import load_config

        # --- setup ---
        outputs = []
        with TempDir() as tmp:
            config = load_config(write_config(tmp.path, COARSE_CROSSING))
            for name in ("first", "second"):
                out = os.path.join(tmp.path, name)
                run("simulate", config, out=out)
                written = [f for f in os.listdir(out) if f.endswith((".csv", ".bin"))]
                outputs.append({f: read_bytes(os.path.join(out, f)) for f in written})

        # --- asserts ---
        self.assertEqual(sorted(outputs[0]), ["errors_eps0.1.csv", "psi_ansatz_eps0.1.bin",
                                              "psi_reference_eps0.1.bin", "summary_eps0.1.csv"])
        self.assertEqual(outputs[0], outputs[1])
