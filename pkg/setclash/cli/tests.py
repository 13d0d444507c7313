import csv
import json
import math
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from pydantic import ValidationError as SchemaError

from altproj.choices import TraceSet
from altproj.rates import HolderParams
from altproj.trace import APTrace, run_ap
from common.exceptions import ReportError
from sets.descriptors import AbsEpigraph, AffineSubspace, Ball, Halfspace, Translate

from .choices import ExitCode
from .demos import demo_scenario
from .reports import emit_trace_csv, failed_checks
from .runner import execute, run_command
from .schemas import Scenario, load_scenario

SCENARIOS = Path(__file__).resolve().parent / "scenarios"

TWO_LINES = [
    {"type": "affine", "point": [0.0, 0.0], "basis": [[1.0, 0.0]]},
    {"type": "affine", "point": [0.0, 0.0], "basis": [[math.cos(math.pi / 6), math.sin(math.pi / 6)]]},
]


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.reader(handle))


class OutputDirMixin:
    def setUp(self):
        super().setUp()
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.out = Path(tmp.name)

    def write_scenario(self, data):
        path = self.out / f"{data['name']}.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    def run_setclash(self, *argv):
        stderr = StringIO()
        code = run_command([*argv, "--out", self.out], stderr=stderr)
        return code, stderr.getvalue()

    def read_report(self, name):
        return json.loads((self.out / f"{name}.report.json").read_text(encoding="utf-8"))


class ScenarioSchemaTest(SimpleTestCase):
    def test_round_trip(self):
        """Serialized scenarios validate back to the same JSON"""
        for path in sorted(SCENARIOS.glob("*.json")):
            first = load_scenario(path).to_dict()
            second = Scenario.model_validate(first).to_dict()
            self.assertEqual(first, second, path.name)

    def test_unknown_field(self):
        """Unknown top-level fields are rejected"""
        with self.assertRaises(SchemaError):
            Scenario.model_validate({"name": "x", "sets": TWO_LINES, "colour": "red"})

    def test_unknown_param(self):
        """Unknown parameters are rejected"""
        with self.assertRaises(SchemaError):
            Scenario.model_validate({"name": "x", "sets": TWO_LINES, "params": {"epsilon": 0.1}})

    def test_unknown_set_type(self):
        """The set type selects the variant"""
        with self.assertRaises(SchemaError):
            Scenario.model_validate({"name": "x", "sets": [{"type": "cone"}, TWO_LINES[0]]})

    def test_needs_two_sets(self):
        """A collection has at least two sets"""
        with self.assertRaises(SchemaError):
            Scenario.model_validate({"name": "x", "sets": TWO_LINES[:1]})

    def test_nested_sets(self):
        """Translates wrap any other variant"""
        scenario = Scenario.model_validate(
            {
                "name": "nested",
                "sets": [
                    {"type": "translate", "inner": {"type": "ball", "center": [0, 0], "radius": 1}, "by": [2, 0]},
                    {"type": "abs_epigraph"},
                ],
            }
        )
        moved, epigraph = scenario.build_sets()
        self.assertIsInstance(moved, Translate)
        self.assertTrue(moved.contains([-2.0, 0.0]))
        self.assertIsInstance(epigraph, AbsEpigraph)

    def test_overrides(self):
        """Flag overrides replace only the given parameters"""
        scenario = load_scenario(SCENARIOS / "balls-primal.json").with_overrides(seed=7, tol=None)
        self.assertEqual(scenario.params.seed, 7)
        self.assertEqual(scenario.params.eps, 2.4)
        self.assertIsNone(scenario.params.tol)

    def test_collection(self):
        """Shifts and the common point reach the collection"""
        coll = load_scenario(SCENARIOS / "balls-primal.json").build_collection()
        self.assertEqual(coll.n, 2)
        np.testing.assert_array_equal(coll.shifts[0], [3.0, 0.0])
        np.testing.assert_array_equal(coll.common_point, [0.0, 0.0])


class TraceCsvTest(OutputDirMixin, SimpleTestCase):
    def test_start_only(self):
        """A trace holding only x0 gives one row with empty step fields"""
        trace = APTrace(Ball([0, 0], 1), Ball([0, 0], 1), [np.array([0.25, 0.5])], [TraceSet.START])
        rows = read_csv(emit_trace_csv(trace, self.out / "start.trace.csv"))
        self.assertEqual(rows[0], ["iter", "set", "x0", "x1", "step_norm", "decrease_lhs", "decrease_rhs", "rate_ratio"])
        self.assertEqual(rows[1], ["0", "x0", "0.25", "0.5", "", "", "", ""])
        self.assertEqual(len(rows), 2)

    def test_example_trace(self):
        """The fourth projection has step norm one"""
        trace = run_ap(Halfspace([0, 1], 0), AbsEpigraph(1.0), [2.0, 0.0])
        rows = read_csv(emit_trace_csv(trace, self.out / "ex.trace.csv"))
        self.assertEqual(len(rows), 6)
        self.assertEqual(rows[5][:2], ["4", "A"])
        self.assertAlmostEqual(float(rows[5][4]), 1.0, places=12)
        np.testing.assert_allclose([float(v) for v in rows[2][2:4]], [0.5, 1.5], atol=1e-12)

    def test_seventeen_digits(self):
        """Floats round-trip through the CSV text"""
        trace = run_ap(Halfspace([0, 1], 0), AbsEpigraph(1.0), [2.0, 0.0])
        rows = read_csv(emit_trace_csv(trace, self.out / "ex.trace.csv"))
        self.assertEqual(float(rows[1][4]), trace.step_norms[0])

    def test_two_lines_rate(self):
        """Same-parity ratios on lines at pi/6 settle at cos^2 = 0.75"""
        scenario = demo_scenario("two-lines")
        a_set, b_set = scenario.build_sets()
        trace = run_ap(a_set, b_set, [1.0, 0.0])
        params = HolderParams(1.0, math.sin(math.pi / 12))
        rows = read_csv(emit_trace_csv(trace, self.out / "lines.trace.csv", params))
        self.assertAlmostEqual(float(rows[21][7]), 0.75, delta=1e-6)
        self.assertLessEqual(float(rows[3][5]), float(rows[3][6]))
        self.assertEqual(rows[4][5:7], ["", ""])

    def test_unwritable_path(self):
        """Write failures name the path"""
        blocker = self.out / "file"
        blocker.write_text("", encoding="utf-8")
        trace = run_ap(Ball([0, 0], 1), Ball([0, 0], 1), [0.0, 0.0])
        with self.assertRaisesMessage(ReportError, str(blocker)):
            emit_trace_csv(trace, blocker / "trace.csv")


class FailedChecksTest(SimpleTestCase):
    def test_nested_checks(self):
        """Failing checks are found at any depth, once per tag"""
        report = {
            "residuals": {"T17-2": {"tag": "T17-2", "pass": False, "residual": -0.1}},
            "primal": {"residuals": {"T12-2": {"tag": "T12-2", "pass": True, "residual": 0.3}}},
            "copies": [{"tag": "T17-2", "pass": False, "residual": -0.1}],
        }
        self.assertEqual([check["tag"] for check in failed_checks(report)], ["T17-2"])

    def test_no_checks(self):
        """Reports without checks pass"""
        self.assertEqual(failed_checks({"index": 1.0, "method": "exact2"}), [])


class RunCommandTest(OutputDirMixin, SimpleTestCase):
    def test_example_demo(self):
        """The halfplane and epigraph demo attains d(A, B) = 1 at step 4"""
        code, _ = self.run_setclash("demo", "example-5.5")
        self.assertEqual(code, ExitCode.OK)
        report = self.read_report("example-5.5")
        self.assertEqual(report["status"], "finite-attainment")
        self.assertEqual(report["termination"]["index"], 4)
        self.assertAlmostEqual(report["termination"]["value"], 1.0, delta=1e-9)
        rows = read_csv(self.out / "example-5.5.trace.csv")
        self.assertEqual(len(rows), 6)
        np.testing.assert_allclose([[float(v) for v in row[2:4]] for row in rows[1:]],
                                   [[2, 0], [0.5, 1.5], [0.5, 0], [0, 1], [0, 0]], atol=1e-12)

    def test_two_lines_demo(self):
        """delta = sin(pi/12) passes the decrease and rate checks"""
        result = execute("demo", "two-lines", out=self.out)
        self.assertEqual(result.exit_code, ExitCode.OK)
        self.assertEqual(result.status, "vanishing-steps")
        self.assertTrue(result.report["decrease"]["passed"])
        self.assertTrue(result.report["linear_rate"]["passed"])
        self.assertEqual(len(result.files), 2)

    def test_unknown_demo(self):
        """Unknown demo names are input errors"""
        code, message = self.run_setclash("demo", "three-lines")
        self.assertEqual(code, ExitCode.INPUT)
        self.assertIn("three-lines", message)

    def test_unknown_subcommand(self):
        """Unknown subcommands are input errors"""
        code, _ = self.run_setclash("solve", str(SCENARIOS / "two-balls.json"))
        self.assertEqual(code, ExitCode.INPUT)

    def test_missing_file(self):
        """A missing scenario file is an input error"""
        code, _ = self.run_setclash("ap", str(self.out / "missing-file.json"))
        self.assertEqual(code, ExitCode.INPUT)

    def test_schema_error(self):
        """Unknown scenario fields are input errors"""
        path = self.write_scenario({"name": "bad", "sets": TWO_LINES, "params": {"x0": [1, 0]}, "extra": 1})
        code, _ = self.run_setclash("ap", path)
        self.assertEqual(code, ExitCode.INPUT)

    def test_index(self):
        """Unit balls three apart are one apart"""
        code, _ = self.run_setclash("index", str(SCENARIOS / "two-balls.json"))
        self.assertEqual(code, ExitCode.OK)
        report = self.read_report("two-balls")
        self.assertAlmostEqual(report["index"], 1.0, places=9)
        self.assertEqual(report["method"], "exact2")

    def test_primal(self):
        """The ball pair certifies and every residual passes"""
        code, _ = self.run_setclash("primal", str(SCENARIOS / "balls-primal.json"))
        self.assertEqual(code, ExitCode.OK)
        report = self.read_report("balls-primal")
        self.assertEqual(report["status"], "passed")
        self.assertTrue(all(check["pass"] for check in report["residuals"].values()))

    def test_dual(self):
        """Closest points of a halfplane and a ball give a passing dual report"""
        code, _ = self.run_setclash("dual", str(SCENARIOS / "halfplane-ball-dual.json"))
        self.assertEqual(code, ExitCode.OK)
        report = self.read_report("halfplane-ball-dual")
        np.testing.assert_allclose(report["duals"], [[0, 1], [0, -1]], atol=1e-12)

    def test_holder(self):
        """The Hölder report adds its residual"""
        code, _ = self.run_setclash("holder", str(SCENARIOS / "halfplane-ball-dual.json"))
        self.assertEqual(code, ExitCode.OK)
        report = self.read_report("halfplane-ball-dual")
        self.assertEqual(report["holder"], {"q": 1.0, "alpha": 1.0})

    def test_delta(self):
        """Lines at pi/6 estimate delta near sin(pi/12) and pass the decrease with it"""
        code, _ = self.run_setclash("delta", str(SCENARIOS / "two-lines-delta.json"))
        self.assertEqual(code, ExitCode.OK)
        report = self.read_report("two-lines-delta")
        self.assertGreaterEqual(report["delta"], math.sin(math.pi / 12) - 1e-9)
        self.assertLess(report["delta"], math.sin(math.pi / 12) + 0.05)
        self.assertEqual(report["scope"], "sampled upper bound")
        self.assertTrue(report["decrease"]["passed"])
        self.assertFalse(report["decrease"]["vacuous"])

    def test_probe(self):
        """Touching halfplanes are reported extremal"""
        code, _ = self.run_setclash("probe", str(SCENARIOS / "touching-halfplanes-probe.json"))
        self.assertEqual(code, ExitCode.OK)
        report = self.read_report("touching-halfplanes-probe")
        self.assertTrue(report["summary"]["extremal"])

    def test_precondition(self):
        """eps below the gauge precondition exits with the precondition code"""
        data = json.loads((SCENARIOS / "balls-primal.json").read_text(encoding="utf-8"))
        data["params"]["eps"] = 1.5
        code, message = self.run_setclash("primal", self.write_scenario(data))
        self.assertEqual(code, ExitCode.PRECONDITION)
        self.assertIn("T12-1", message)

    def test_verification_failure(self):
        """An overstated delta fails the decrease check at the first cycle"""
        data = {"name": "lines", "sets": TWO_LINES, "params": {"x0": [1.0, 0.0], "delta": 0.9}}
        code, message = self.run_setclash("ap", self.write_scenario(data))
        self.assertEqual(code, ExitCode.VERIFY_FAILED)
        self.assertIn("C5.4-2.1 violated, residual=", message)
        self.assertTrue((self.out / "lines.trace.csv").exists())

    def test_seed_required(self):
        """Sampling subcommands need a seed"""
        data = json.loads((SCENARIOS / "balls-primal.json").read_text(encoding="utf-8"))
        del data["params"]["seed"]
        code, message = self.run_setclash("primal", self.write_scenario(data))
        self.assertEqual(code, ExitCode.INPUT)
        self.assertIn("seed", message)

    def test_max_iter_override(self):
        """--max-iter caps the demo run"""
        code, _ = self.run_setclash("demo", "example-5.5", "--max-iter", "2")
        self.assertEqual(code, ExitCode.OK)
        self.assertEqual(self.read_report("example-5.5")["status"], "undetermined")
        self.assertEqual(len(read_csv(self.out / "example-5.5.trace.csv")), 4)

    def test_two_line_sets(self):
        """Scenario lines match the library descriptors"""
        a_set, b_set = Scenario.model_validate({"name": "x", "sets": TWO_LINES}).build_sets()
        self.assertIsInstance(a_set, AffineSubspace)
        self.assertAlmostEqual(b_set.dist([0.0, 1.0]), math.cos(math.pi / 6), places=12)
