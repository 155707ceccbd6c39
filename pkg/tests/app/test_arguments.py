from tests.app import SINGLE_CROSSING, write_config
from tests.base_test import BaseTest, TempDir


class ParserTest(BaseTest):

    def test_subcommands(self):
        from pyconic.arguments import parser

        # --- setup ---
        args = parser.parse_args(["sweep", "--config", "a.ini", "--threads", "4", "--log-level", "debug"])
        classical = parser.parse_args(["classical", "--config", "a.ini", "--eigenframe"])
        lz = parser.parse_args(["lz-scatter", "--eta2-grid=-1:1:0.25", "--out", "lz"])

        # --- asserts ---
        self.assertEqual((args.command, args.config, args.threads, args.log_level), ("sweep", "a.ini", 4, "DEBUG"))
        self.assertTrue(classical.eigenframe)
        self.assertIsNone(lz.config)
        self.assertEqual(lz.eta2_grid, (-1.0, 1.0, 0.25))
        self.assertEqual(lz.out, "lz")

    def test_rejected(self):
        from pyconic.arguments import parser

        for argv in (["simulate"], ["lz-scatter", "--eta2-grid", "1:-1:0.1"], ["lz-scatter", "--eta2-grid", "1"],
                     ["transfer", "--config", "a.ini"], []):
            with self.assertRaises(SystemExit):
                parser.parse_args(argv)


class ConfigFileTest(BaseTest):

    def test_parse_and_lines(self):
        from pyconic.arguments import config_lines, parse_configfile

        # --- setup ---
        with TempDir() as tmp:
            path = write_config(tmp.path, SINGLE_CROSSING)
            parsed = parse_configfile(path)
            lines = config_lines(path)

        # --- asserts ---
        self.assertEqual(parsed["initial"]["z0"], [-1.0, 0.0, 2.0, 0.0])
        self.assertEqual(parsed["run"]["epsilons"], [0.02, 0.01, 0.005])
        self.assertEqual(parsed["model"]["name"], "linear-isotropic")
        self.assertEqual(lines[("model", None)], 1)
        self.assertEqual(lines[("model", "name")], 2)
        self.assertEqual(lines[("grid", "profile_dt")], SINGLE_CROSSING.splitlines().index("profile_dt = 5e-4") + 1)

    def test_broken_file(self):
        from pyconic.arguments import parse_configfile
        from pyconic.exceptions import ConfigValidationError

        with TempDir() as tmp:
            path = write_config(tmp.path, "kind = 1\n[run]\n")
            with self.assertRaises(ConfigValidationError):
                parse_configfile(path)
