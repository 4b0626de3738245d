"""
Unit tests for the file_utils module.
"""
import json
import os
import shutil
import tempfile
import unittest
from datetime import datetime

from app.core.measures import AtomicMeasure
from app.core.spaces import FiniteSpace, Interval, QProduct, Ray, Scalar
from app.core.transport import solve_wp
from app.utils.file_utils import (
    create_timestamped_directory,
    ensure_directory_exists,
    load_json,
    load_measure,
    load_plan,
    load_space,
    save_csv,
    save_json,
    save_measure,
    save_plan,
    validate_input_files,
    validate_json_file,
)


class TestFileUtils(unittest.TestCase):
    """Test case for file utility functions."""

    def setUp(self):
        """Set up test environment."""
        self.test_dir = tempfile.mkdtemp()

        self.space = QProduct(Ray(), FiniteSpace.cycle(3))

        # A measure file on the ray
        self.measure_file = os.path.join(self.test_dir, "mu.json")
        with open(self.measure_file, "w") as f:
            json.dump({
                "space": {"kind": "ray"},
                "atoms": [{"point": 1.0, "weight": 0.5}, {"point": 3.0, "weight": 0.5}],
            }, f)

        # Invalid and empty files
        self.invalid_file = os.path.join(self.test_dir, "invalid.json")
        with open(self.invalid_file, "w") as f:
            f.write("{not json")
        self.empty_file = os.path.join(self.test_dir, "empty.json")
        with open(self.empty_file, "w") as f:
            pass
        self.list_file = os.path.join(self.test_dir, "list.json")
        with open(self.list_file, "w") as f:
            f.write("[1, 2]")

    def tearDown(self):
        """Clean up after tests."""
        shutil.rmtree(self.test_dir)

    def test_save_json_creates_directories(self):
        """Test writing JSON below missing directories."""
        path = os.path.join(self.test_dir, "a", "b", "data.json")
        save_json({"x": 1}, path)
        self.assertEqual(load_json(path), {"x": 1})
        with open(path) as f:
            self.assertTrue(f.read().endswith("}\n"))

    def test_save_csv(self):
        """Test writing a CSV file."""
        path = save_csv(("a", "b"), [[1, 2], [3, ""]], os.path.join(self.test_dir, "rows.csv"))
        with open(path) as f:
            self.assertEqual(f.read().splitlines(), ["a,b", "1,2", "3,"])

    def test_load_measure(self):
        """Test loading a measure with and without a space override."""
        mu = load_measure(self.measure_file)
        self.assertEqual(mu.space, Ray())
        self.assertEqual(mu.points, (Scalar(1.0), Scalar(3.0)))

        overridden = load_measure(self.measure_file, Interval(0.0, 10.0))
        self.assertEqual(overridden.space, Interval(0.0, 10.0))

    def test_measure_and_plan_round_trip(self):
        """Test saving and reloading measures and plans."""
        mu = load_measure(self.measure_file)
        nu = AtomicMeasure(Ray(), (Scalar(0.0), Scalar(2.0)), (0.75, 0.25))
        measure_path = save_measure(nu, os.path.join(self.test_dir, "nu.json"))
        self.assertTrue(load_measure(measure_path).approx_equal(nu))

        _, plan = solve_wp(Ray(), mu, nu, 2.0)
        plan_path = save_plan(plan, os.path.join(self.test_dir, "plan.json"))
        self.assertAlmostEqual(load_plan(plan_path).cost, plan.cost, places=12)

    def test_load_space(self):
        """Test loading a space description."""
        path = save_json(self.space.to_dict(), os.path.join(self.test_dir, "space.json"))
        self.assertEqual(load_space(path), self.space)

    def test_ensure_directory_exists(self):
        """Test ensuring a directory exists."""
        new_dir = os.path.join(self.test_dir, "new_dir")
        self.assertFalse(os.path.exists(new_dir))

        ensure_directory_exists(new_dir)
        self.assertTrue(os.path.exists(new_dir))

        # Calling again leaves it in place
        ensure_directory_exists(new_dir)
        self.assertTrue(os.path.isdir(new_dir))

    def test_create_timestamped_directory(self):
        """Test creating a timestamped directory."""
        base_dir = os.path.join(self.test_dir, "results")
        timestamped_dir = create_timestamped_directory(base_dir)

        self.assertTrue(os.path.exists(timestamped_dir))
        self.assertTrue(os.path.isdir(timestamped_dir))

        # Check that the directory name is a timestamp
        dir_name = os.path.basename(timestamped_dir)
        try:
            datetime.strptime(dir_name, "%Y-%m-%d_%H-%M-%S")
            is_valid_format = True
        except ValueError:
            is_valid_format = False
        self.assertTrue(is_valid_format)

    def test_validate_json_file(self):
        """Test validating JSON input files."""
        is_valid, message = validate_json_file(self.measure_file, ("atoms",))
        self.assertTrue(is_valid)
        self.assertEqual(message, "")

        is_valid, message = validate_json_file(os.path.join(self.test_dir, "missing.json"))
        self.assertFalse(is_valid)
        self.assertIn("does not exist", message)

        is_valid, message = validate_json_file(self.empty_file)
        self.assertFalse(is_valid)
        self.assertIn("empty", message)

        is_valid, message = validate_json_file(self.invalid_file)
        self.assertFalse(is_valid)
        self.assertIn("not valid JSON", message)

        is_valid, message = validate_json_file(self.list_file)
        self.assertFalse(is_valid)
        self.assertIn("Expected a JSON object", message)

        is_valid, message = validate_json_file(self.measure_file, ("atoms", "space", "p"))
        self.assertFalse(is_valid)
        self.assertIn("Missing keys", message)
        self.assertIn("p", message)

    def test_validate_input_files(self):
        """Test validating several labeled files at once."""
        errors = validate_input_files({
            "mu": (self.measure_file, ("atoms",)),
            "nu": (self.empty_file, ("atoms",)),
        })
        self.assertEqual(len(errors), 1)
        self.assertTrue(errors[0].startswith("nu: "))


if __name__ == "__main__":
    unittest.main()
