#!/usr/bin/env python3
"""
Command-line entry point of the Wasserstein Rigidity Lab.
"""
import argparse
import json
import logging
import os
import sys
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import ValidationError
from tqdm import tqdm

from app.config.settings import settings
from app.core.exceptions import MeasureError, SpaceError, WassersteinLabError
from app.core.interpolation import displacement_interpolate
from app.core.measures import AtomicMeasure, measure_from_dict
from app.core.rigidity import exotic_isometry
from app.core.spaces import QProduct, SpaceDescriptor
from app.core.suites import REPORT_CSV_HEADER, RunReport, run_suite, suite_names
from app.core.transport import is_cyclically_monotone, solve_wp
from app.utils.file_utils import (
    create_timestamped_directory,
    load_json,
    load_plan,
    load_space,
    save_csv,
    save_json,
    save_text,
    validate_input_files,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT_ERROR = 2


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        description="Wasserstein Rigidity Lab: exact optimal transport and rigidity experiments"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    wp = subparsers.add_parser("wp", help="Exact W_p distance and an optimal plan")
    wp.add_argument("--space", type=str, help="Space JSON overriding the one embedded in the measures")
    wp.add_argument("--mu", type=str, required=True, help="Source measure JSON")
    wp.add_argument("--nu", type=str, required=True, help="Target measure JSON")
    wp.add_argument(
        "--p",
        type=float,
        default=settings.default_p,
        help=f"Wasserstein exponent (default: {settings.default_p})"
    )
    wp.add_argument("--q", type=float, help="Override q of a q-product space")
    wp.add_argument("--out", "--plan", dest="out", type=str, help="Write the optimal plan JSON here")

    interpolate = subparsers.add_parser("interpolate", help="Displacement interpolation of a stored plan")
    interpolate.add_argument("--plan", type=str, required=True, help="Plan JSON written by 'wp'")
    interpolate.add_argument("--t", type=float, default=0.5, help="Interpolation parameter (default: 0.5)")
    interpolate.add_argument("--out", type=str, help="Write the measure JSON here instead of stdout")

    verify = subparsers.add_parser("verify", help="Run a verification suite")
    verify.add_argument("suite", type=str, help=f"Suite name or 'all' ({', '.join(suite_names())})")
    verify.add_argument(
        "--seed",
        type=int,
        default=settings.default_seed,
        help=f"Seed of the random instances (default: {settings.default_seed})"
    )
    verify.add_argument(
        "--format",
        choices=("json", "csv"),
        default="json",
        help="Also write a CSV report with 'csv' (default: json)"
    )
    verify.add_argument("--out", type=str, help="Report file for a single suite")
    verify.add_argument(
        "--results-dir",
        type=str,
        default=settings.results_base_dir,
        help=f"Directory to store reports (default: {settings.results_base_dir})"
    )

    exotic = subparsers.add_parser("exotic", help="Apply the barycentric rotation to a measure")
    exotic.add_argument("--psi", type=str, required=True, help="Orthogonal matrix JSON (list of rows)")
    exotic.add_argument("--mu", type=str, required=True, help="Measure JSON on Euclidean x_2 Y")
    exotic.add_argument("--space", type=str, help="Space JSON overriding the embedded one")
    exotic.add_argument("--q", type=float, help="Override q of the product space")
    exotic.add_argument("--out", type=str, help="Write the image measure JSON here instead of stdout")

    report = subparsers.add_parser("report", help="Re-render a stored report")
    report.add_argument("--input", type=str, required=True, help="Report JSON written by 'verify'")
    report.add_argument("--format", choices=("json", "csv"), default="json", help="Output format (default: json)")
    report.add_argument("--out", type=str, help="Write the rendering here instead of stdout")

    return parser.parse_args(argv)


def _with_q(space: SpaceDescriptor, q: Optional[float]) -> SpaceDescriptor:
    if q is None:
        return space
    if not isinstance(space, QProduct):
        raise SpaceError(f"--q needs a q-product space, got {space.describe()}")
    return QProduct(space.left, space.right, q)


def _load_measures(args: argparse.Namespace, files: Dict[str, str]) -> Tuple[SpaceDescriptor, List[AtomicMeasure]]:
    errors = validate_input_files({label: (path, ("atoms",)) for label, path in files.items()})
    if errors:
        raise MeasureError("; ".join(errors))
    raw = [load_json(path) for path in files.values()]
    if args.space is not None:
        space = load_space(args.space)
    else:
        space = measure_from_dict(raw[0]).space
    space = _with_q(space, args.q)
    return space, [measure_from_dict(data, space) for data in raw]


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        print(text)
    else:
        save_text(text + "\n", out)
        print(f"Saved to {out}")


def command_wp(args: argparse.Namespace) -> int:
    space, (mu, nu) = _load_measures(args, {"mu": args.mu, "nu": args.nu})
    wp, plan = solve_wp(space, mu, nu, args.p)
    print(f"W_{args.p:g} = {wp:.15g}")
    print(f"Support of the optimal plan: {len(plan.entries)} entries")
    if is_cyclically_monotone(plan):
        print("✓ Plan is cyclically monotone")
    else:
        print("✗ Plan failed the cyclical monotonicity check")
    if args.out:
        save_json(plan.to_dict(), args.out)
        print(f"Plan saved to {args.out}")
    return EXIT_OK


def command_interpolate(args: argparse.Namespace) -> int:
    plan = load_plan(args.plan)
    measure = displacement_interpolate(plan, args.t)
    _emit(json.dumps(measure.to_dict(), indent=2), args.out)
    return EXIT_OK


def command_exotic(args: argparse.Namespace) -> int:
    psi = np.asarray(load_json(args.psi), dtype=float)
    _, (mu,) = _load_measures(args, {"mu": args.mu})
    image = exotic_isometry(psi, mu)
    _emit(json.dumps(image.to_dict(), indent=2), args.out)
    return EXIT_OK


def _print_report(report: RunReport) -> None:
    passed = len(report.assertions) - len(report.failures)
    timing = f" in {report.wall_time:.2f} s" if report.wall_time is not None else ""
    marker = "✓" if report.passed else "✗"
    print(f"{marker} {report.suite} (seed {report.seed}): {passed}/{len(report.assertions)} assertions passed{timing}")
    for failure in report.failures:
        print(f"  ✗ {failure.id}: {failure.description} (expected {failure.expected}, got {failure.actual})")


def command_verify(args: argparse.Namespace) -> int:
    names = suite_names() if args.suite == "all" else [args.suite]
    formats = ("json", "csv") if args.format == "csv" else ("json",)
    results_dir = None
    if args.out is None or len(names) > 1:
        results_dir = create_timestamped_directory(args.results_dir)
        print(f"Results will be saved to: {results_dir}")

    reports = []
    for name in tqdm(names, desc="Running suites", disable=len(names) == 1 or not settings.show_progress):
        if results_dir is None:
            output_path = args.out
        else:
            output_path = os.path.join(results_dir, f"{name}.json")
        report = run_suite(name, args.seed, output_path, formats)
        _print_report(report)
        reports.append(report)

    failed = [r.suite for r in reports if not r.passed]
    total = sum(len(r.assertions) for r in reports)
    print("\nVerification complete!")
    print(f"Suites run: {len(reports)}")
    print(f"Assertions checked: {total}")
    print(f"Suites failed: {len(failed)}")
    if failed:
        print(f"Failing suites: {', '.join(failed)}")
        return EXIT_FAILED
    return EXIT_OK


def command_report(args: argparse.Namespace) -> int:
    with open(args.input, "r", encoding="utf-8") as f:
        report = RunReport.model_validate_json(f.read())
    if args.format == "csv":
        if args.out:
            save_csv(REPORT_CSV_HEADER, report.csv_rows(), args.out)
            print(f"Saved to {args.out}")
        else:
            print(",".join(REPORT_CSV_HEADER))
            for row in report.csv_rows():
                print(",".join(str(cell) for cell in row))
    elif args.out:
        save_text(report.to_json(), args.out)
        print(f"Saved to {args.out}")
    else:
        print(report.to_json(), end="")
    _print_report(report)
    return report.exit_code


COMMANDS = {
    "wp": command_wp,
    "interpolate": command_interpolate,
    "verify": command_verify,
    "exotic": command_exotic,
    "report": command_report,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the application."""
    args = parse_arguments(argv)
    logging.basicConfig(level=settings.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (WassersteinLabError, FileNotFoundError, json.JSONDecodeError, ValidationError, OSError) as e:
        print(f"✗ {e}")
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
