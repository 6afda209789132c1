import json
import tempfile
import unittest
from pathlib import Path

from click.testing import CliRunner

from ribbon_screen.utils.cli import USAGE_EXIT, cli, main
from ribbon_screen.utils.config import DEFAULT_CONFIG
from ribbon_screen.utils.selftest import DATA_DIR

GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


def data(name):
    return str(DATA_DIR / name)


class TestCommands(unittest.TestCase):
    def setUp(self):
        self.runner = CliRunner()

    def invoke(self, *args):
        return self.runner.invoke(cli, list(args))

    def assertGolden(self, result, name):
        self.assertEqual(result.exit_code, 0, result.output)
        expected = json.loads((GOLDEN_DIR / name).read_text())
        self.assertEqual(json.loads(result.stdout), expected)

    def test_homology_golden(self):
        for name in ("unknot", "trefoil", "figure_eight", "five_two"):
            with self.subTest(knot=name):
                self.assertGolden(
                    self.invoke("--format", "structured", "homology", data(f"{name}.grid")), f"homology_{name}.json"
                )

    def test_screen_golden(self):
        result = self.invoke("--format", "structured", "screen", data("knots.json"), "--target", "trefoil")
        self.assertEqual(result.exit_code, 0, result.output)
        payload = json.loads(result.stdout)
        reduced = {
            "target": payload["target"],
            "summary": payload["summary"],
            "verdicts": [
                {
                    "candidate": v["candidate"],
                    "overall": v["overall"],
                    "rules": {r["rule"]: r["status"] for r in v["rules"]},
                }
                for v in payload["verdicts"]
            ],
        }
        self.assertEqual(reduced, json.loads((GOLDEN_DIR / "screen_trefoil.json").read_text()))

    def test_output_does_not_depend_on_workers(self):
        runs = [("homology", data(f"{name}.grid")) for name in ("unknot", "trefoil", "figure_eight", "five_two")]
        runs += [("cover", data(f"{name}.grid"), "-n", "2") for name in ("unknot", "trefoil", "figure_eight", "five_two")]
        runs += [("cover", data(f"{name}.grid"), "-n", "2", "--homology") for name in ("unknot", "trefoil")]
        for args in runs:
            outputs = []
            for workers in ("1", "2", "8"):
                result = self.invoke("--format", "structured", "--workers", workers, *args)
                self.assertEqual(result.exit_code, 0, result.output)
                outputs.append(result.stdout)
            with self.subTest(args=args):
                self.assertEqual(outputs[1], outputs[0])
                self.assertEqual(outputs[2], outputs[0])

    def test_cover_golden(self):
        self.assertGolden(
            self.invoke("--format", "structured", "cover", data("unknot.grid"), "-n", "1"), "cover_unknot_n1.json"
        )

    def test_bounds_golden(self):
        self.assertGolden(
            self.invoke("--format", "structured", "bounds", "dilatation-arc", "delta=5"), "bounds_dilatation_arc.json"
        )

    def test_homology_human(self):
        result = self.invoke("homology", data("trefoil.grid"))
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("total 3 (tilde 48)", result.output)
        self.assertIn("\ntilde\nmaslov alexander dim\n-4 -5 1\n-3 -4 5\n", result.output)
        self.assertIn("\n2 1 1\ngenus 1", result.output)
        self.assertIn("genus 1  fibered true", result.output)
        self.assertIn("alexander t - 1 + t^-1", result.output)

    def test_cover_bound_only(self):
        result = self.invoke("--cover-ceiling", "5", "cover", data("trefoil.grid"), "-n", "2")
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("generators bound only", result.output)

    def test_cover_homology(self):
        result = self.invoke("cover", data("unknot.grid"), "-n", "2", "--homology")
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("cover total 2  hat total 1", result.output)

    def test_cover_table_header(self):
        result = self.invoke("cover", data("unknot.grid"), "-n", "1", "--homology")
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("maslov alexander dim", result.output)
        result = self.invoke("cover", data("unknot.grid"), "-n", "2", "--homology")
        self.assertIn("parity alexander dim", result.output)

    def test_dilatation(self):
        result = self.invoke("--n-max", "20", "dilatation", data("golden_ratio.matrix"))
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("spectral radius 1.61803398", result.output)
        self.assertIn("\n20 1.618", result.output)

    def test_bounds_with_measurement(self):
        result = self.invoke("bounds", "volume-arc", "g=1", "delta=6", "measured=2.03")
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("satisfied true", result.output)

    def test_bounds_beyond_float_range(self):
        result = self.invoke("--format", "structured", "bounds", "dilatation-arc", "delta=171", "measured=2.6")
        self.assertEqual(result.exit_code, 0, result.output)
        payload = json.loads(result.stdout)
        self.assertEqual(payload["bound"]["upper"], "inf")
        self.assertTrue(payload["satisfied"])
        result = self.invoke("bounds", "dilatation-arc", "delta=200")
        self.assertEqual(result.exit_code, 0, result.output)

    def test_volume_ratio(self):
        result = self.invoke("--format", "structured", "bounds", "volume-ratio", "g=2", "b=1")
        bound = json.loads(result.stdout)["bound"]
        self.assertLessEqual(bound["lower"], 18 * 3.141592653589793)
        self.assertGreaterEqual(bound["upper"], 18 * 3.141592653589793)

    def test_screen(self):
        result = self.invoke("--format", "structured", "screen", data("knots.json"), "--target", "trefoil")
        self.assertEqual(result.exit_code, 0, result.output)
        payload = json.loads(result.stdout)
        self.assertEqual(payload["summary"], {"EXCLUDED": 3, "POSSIBLE": 1, "MUST_EQUAL": 1})
        overall = {v["candidate"]: v["overall"] for v in payload["verdicts"]}
        self.assertEqual(overall["unknot"], "POSSIBLE")
        self.assertEqual(overall["trefoil"], "MUST_EQUAL")

    def test_chain(self):
        result = self.invoke("chain", data("knots.json"), "trefoil", "unknot")
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("trefoil >= unknot", result.output)
        self.assertIn("stabilization guaranteed true", result.output)

    def test_selftest_below_screening_ceiling(self):
        result = self.invoke("--ceiling", "5", "selftest")
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("0 failed", result.output)
        self.assertIn("skipped below grid ceiling 7", result.output)


class TestErrors(unittest.TestCase):
    def setUp(self):
        self.runner = CliRunner()
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def run_cli(self, *args):
        return self.runner.invoke(cli, list(args))

    def write(self, name, text):
        path = Path(self.tmp.name) / name
        path.write_text(text)
        return str(path)

    def assertFails(self, result, code, reason):
        self.assertEqual(result.exit_code, code, result.output)
        self.assertIn(f"error[{reason}]", result.output)

    def test_grid_parse_error(self):
        self.assertFails(self.run_cli("homology", self.write("bad.grid", "2\nX: 0 1\nO: 0 1\n")), 1, "grid-parse")

    def test_link_is_not_a_knot(self):
        path = self.write("link.grid", "4\nX: 1 0 3 2\nO: 0 1 2 3\n")
        self.assertFails(self.run_cli("homology", path), 1, "not-a-knot")

    def test_ceiling(self):
        self.assertFails(self.run_cli("--ceiling", "5", "homology", data("five_two.grid")), 2, "ceiling")

    def test_non_primitive_matrix(self):
        path = self.write("swap.matrix", "2\n0 1\n1 0\n")
        self.assertFails(self.run_cli("dilatation", path), 4, "non-primitive")

    def test_missing_target(self):
        self.assertFails(self.run_cli("screen", data("knots.json"), "--target", "5_1"), 5, "missing-target")

    def test_bad_database(self):
        path = self.write("db.json", '[{"name": "k", "colour": "red"}]')
        self.assertFails(self.run_cli("screen", path, "--target", "k"), 6, "database")

    def test_bound_parameters(self):
        self.assertFails(self.run_cli("bounds", "volume-arc", "g=1"), 7, "bound-parameters")
        self.assertFails(self.run_cli("bounds", "volume-arc", "g"), 7, "bound-parameters")

    def test_usage_errors(self):
        self.assertFails(self.run_cli("homology", str(Path(self.tmp.name) / "absent.grid")), USAGE_EXIT, "usage")
        self.assertFails(self.run_cli("--no-such-flag", "selftest"), USAGE_EXIT, "usage")
        self.assertFails(self.run_cli("cover", data("unknot.grid")), USAGE_EXIT, "usage")


class TestMain(unittest.TestCase):
    def test_returns_exit_code(self):
        self.assertEqual(main(["bounds", "dilatation-arc", "delta=5"]), 0)
        self.assertEqual(main(["bounds", "no-such-bound"]), 7)

    def test_defaults_seed_the_configuration(self):
        self.assertEqual(main(["homology", data("trefoil.grid")], DEFAULT_CONFIG.replace(grid_ceiling=4)), 2)
