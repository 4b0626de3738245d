"""
Unit tests for the run.py module.
"""
import io
import json
import os
import shutil
import tempfile
import unittest
from unittest.mock import patch

# Import the function to test
import sys
import os.path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../../')))
from run import EXIT_FAILED, EXIT_INPUT_ERROR, EXIT_OK, main, parse_arguments

from app.core.suites import Assertion, RunReport


def _report(passed: bool) -> RunReport:
    return RunReport(
        suite="stub",
        seed=7,
        assertions=[Assertion(id="check", description="stubbed", expected=True, actual=passed, passed=passed)],
    )


class TestRunModule(unittest.TestCase):
    """Test case for functions in the run.py module."""

    def setUp(self):
        self.test_dir = tempfile.mkdtemp()
        self.mu_file = self._write("mu.json", {
            "space": {"kind": "ray"},
            "atoms": [{"point": 0.0, "weight": 1.0}],
        })
        self.nu_file = self._write("nu.json", {
            "space": {"kind": "ray"},
            "atoms": [{"point": 2.0, "weight": 1.0}],
        })

    def tearDown(self):
        shutil.rmtree(self.test_dir)

    def _write(self, name, data):
        path = os.path.join(self.test_dir, name)
        with open(path, "w") as f:
            json.dump(data, f)
        return path

    def _main(self, argv):
        with patch('sys.stdout', new_callable=io.StringIO) as stdout:
            code = main(argv)
        return code, stdout.getvalue()

    def test_parse_arguments_defaults(self):
        """Test default values of the wp subcommand."""
        args = parse_arguments(["wp", "--mu", "a.json", "--nu", "b.json"])
        self.assertEqual(args.command, "wp")
        self.assertEqual(args.p, 2.0)
        self.assertIsNone(args.q)

    def test_missing_subcommand(self):
        """Test that argparse rejects a missing subcommand."""
        with patch('sys.stderr', new_callable=io.StringIO):
            with self.assertRaises(SystemExit) as context:
                parse_arguments([])
        self.assertEqual(context.exception.code, 2)

    def test_wp_and_interpolate(self):
        """Test solving a plan and interpolating it."""
        plan_file = os.path.join(self.test_dir, "plan.json")
        code, output = self._main(["wp", "--mu", self.mu_file, "--nu", self.nu_file, "--out", plan_file])
        self.assertEqual(code, EXIT_OK)
        self.assertIn("W_2 = 2", output)
        self.assertIn("✓ Plan is cyclically monotone", output)
        self.assertTrue(os.path.exists(plan_file))

        middle_file = os.path.join(self.test_dir, "middle.json")
        code, _ = self._main(["interpolate", "--plan", plan_file, "--t", "0.5", "--out", middle_file])
        self.assertEqual(code, EXIT_OK)
        with open(middle_file) as f:
            middle = json.load(f)
        self.assertEqual(middle["atoms"], [{"point": 1.0, "weight": 1.0}])

    def test_wp_plan_alias(self):
        """Test that --plan names the plan output of wp like --out."""
        plan_file = os.path.join(self.test_dir, "alias.json")
        args = parse_arguments(["wp", "--mu", "a.json", "--nu", "b.json", "--plan", plan_file])
        self.assertEqual(args.out, plan_file)
        code, output = self._main(["wp", "--mu", self.mu_file, "--nu", self.nu_file, "--plan", plan_file])
        self.assertEqual(code, EXIT_OK)
        self.assertIn(f"Plan saved to {plan_file}", output)
        self.assertTrue(os.path.exists(plan_file))

    def test_wp_input_errors(self):
        """Test that unreadable or inconsistent inputs exit with code 2."""
        missing = os.path.join(self.test_dir, "missing.json")
        code, output = self._main(["wp", "--mu", missing, "--nu", self.nu_file])
        self.assertEqual(code, EXIT_INPUT_ERROR)
        self.assertIn("✗ mu: File does not exist", output)

        code, _ = self._main(["wp", "--mu", self.mu_file, "--nu", self.nu_file, "--q", "3"])
        self.assertEqual(code, EXIT_INPUT_ERROR)

        code, _ = self._main(["wp", "--mu", self.mu_file, "--nu", self.nu_file, "--p", "0.5"])
        self.assertEqual(code, EXIT_INPUT_ERROR)

    def test_exotic(self):
        """Test applying the barycentric rotation from files."""
        psi_file = self._write("psi.json", [[0.0, -1.0], [1.0, 0.0]])
        space = {"kind": "qproduct", "left": {"kind": "euclidean", "dim": 2}, "right": {"kind": "ray"}, "q": 2.0}
        mu_file = self._write("product.json", {
            "space": space,
            "atoms": [
                {"point": [[1.0, 0.0], 0.0], "weight": 0.5},
                {"point": [[-1.0, 0.0], 1.0], "weight": 0.5},
            ],
        })
        out_file = os.path.join(self.test_dir, "image.json")
        code, _ = self._main(["exotic", "--psi", psi_file, "--mu", mu_file, "--out", out_file])
        self.assertEqual(code, EXIT_OK)
        with open(out_file) as f:
            image = json.load(f)
        points = sorted(tuple(atom["point"][0]) for atom in image["atoms"])
        self.assertEqual(points, [(0.0, -1.0), (0.0, 1.0)])

        code, _ = self._main(["exotic", "--psi", psi_file, "--mu", self.mu_file])
        self.assertEqual(code, EXIT_INPUT_ERROR)

    @patch('run.run_suite')
    def test_verify_exit_codes(self, mock_run_suite):
        """Test that verify reflects the suite outcome in its exit code."""
        mock_run_suite.return_value = _report(True)
        code, output = self._main(["verify", "stub", "--results-dir", self.test_dir])
        self.assertEqual(code, EXIT_OK)
        self.assertIn("Verification complete!", output)
        mock_run_suite.assert_called_once()
        self.assertEqual(mock_run_suite.call_args[0][:2], ("stub", 7))

        mock_run_suite.return_value = _report(False)
        code, output = self._main(["verify", "stub", "--out", os.path.join(self.test_dir, "stub.json")])
        self.assertEqual(code, EXIT_FAILED)
        self.assertIn("✗ check", output)

    def test_verify_unknown_suite(self):
        """Test that an unknown suite name is an input error."""
        code, output = self._main(["verify", "no-such-suite", "--results-dir", self.test_dir])
        self.assertEqual(code, EXIT_INPUT_ERROR)
        self.assertIn("Unknown suite", output)

    def test_verify_writes_reports(self):
        """Test a real suite run with CSV output."""
        out_file = os.path.join(self.test_dir, "conditions.json")
        code, _ = self._main(["verify", "conditions", "--seed", "3", "--format", "csv", "--out", out_file])
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(os.path.exists(out_file))
        self.assertTrue(os.path.exists(os.path.join(self.test_dir, "conditions.csv")))

    def test_report(self):
        """Test re-rendering a stored report."""
        report_file = os.path.join(self.test_dir, "report.json")
        with open(report_file, "w") as f:
            f.write(_report(False).to_json())

        code, output = self._main(["report", "--input", report_file])
        self.assertEqual(code, EXIT_FAILED)
        self.assertIn('"suite": "stub"', output)

        csv_file = os.path.join(self.test_dir, "report.csv")
        code, _ = self._main(["report", "--input", report_file, "--format", "csv", "--out", csv_file])
        self.assertEqual(code, EXIT_FAILED)
        with open(csv_file) as f:
            self.assertTrue(f.readline().startswith("suite,seed,id"))

        self._write("broken.json", {"suite": "stub"})
        code, _ = self._main(["report", "--input", os.path.join(self.test_dir, "broken.json")])
        self.assertEqual(code, EXIT_INPUT_ERROR)


if __name__ == "__main__":
    unittest.main()
