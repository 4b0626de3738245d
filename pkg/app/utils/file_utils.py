"""
File utility functions for the Wasserstein Rigidity Lab.
"""
import csv
import datetime
import json
import os
from typing import Any, Dict, List, Optional, Sequence, Tuple

from app.core.measures import AtomicMeasure, measure_from_dict
from app.core.spaces import SpaceDescriptor, space_from_dict
from app.core.transport import TransportPlan, plan_from_dict


def load_json(file_path: str) -> Any:
    """
    Read a JSON document.

    Args:
        file_path: Path to the JSON file.

    Returns:
        The decoded document.

    Raises:
        FileNotFoundError: If the file does not exist.
        json.JSONDecodeError: If the file is not valid JSON.
    """
    with open(file_path, "r", encoding="utf-8") as f:
        return json.load(f)


def save_json(data: Any, file_path: str) -> str:
    """
    Write a JSON document with two-space indentation, creating parent directories.

    Returns:
        The path written.
    """
    ensure_directory_exists(os.path.dirname(file_path) or ".")
    with open(file_path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2)
        f.write("\n")
    return file_path


def save_text(text: str, file_path: str) -> str:
    ensure_directory_exists(os.path.dirname(file_path) or ".")
    with open(file_path, "w", encoding="utf-8") as f:
        f.write(text)
    return file_path


def save_csv(header: Sequence[str], rows: Sequence[Sequence[Any]], file_path: str) -> str:
    """
    Write rows under a header line.

    Returns:
        The path written.
    """
    ensure_directory_exists(os.path.dirname(file_path) or ".")
    with open(file_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)
    return file_path


def load_space(file_path: str) -> SpaceDescriptor:
    return space_from_dict(load_json(file_path))


def load_measure(file_path: str, space: Optional[SpaceDescriptor] = None) -> AtomicMeasure:
    """
    Load a measure file.

    Args:
        file_path: Path to the measure JSON.
        space: Space overriding the one embedded in the file.

    Returns:
        The validated measure.
    """
    return measure_from_dict(load_json(file_path), space)


def load_plan(file_path: str) -> TransportPlan:
    return plan_from_dict(load_json(file_path))


def save_measure(mu: AtomicMeasure, file_path: str) -> str:
    return save_json(mu.to_dict(), file_path)


def save_plan(plan: TransportPlan, file_path: str) -> str:
    return save_json(plan.to_dict(), file_path)


def ensure_directory_exists(directory: str) -> None:
    """
    Create directory if it doesn't exist.

    Args:
        directory: Path to the directory to create.
    """
    if not os.path.exists(directory):
        os.makedirs(directory)


def create_timestamped_directory(base_dir: str) -> str:
    """
    Create a timestamped directory under the base directory.

    Args:
        base_dir: Base directory path.

    Returns:
        Path to the created timestamped directory.
    """
    ensure_directory_exists(base_dir)

    # Create a timestamp string in format YYYY-MM-DD_HH-MM-SS
    timestamp = datetime.datetime.now().strftime("%Y-%m-%d_%H-%M-%S")

    timestamped_dir = os.path.join(base_dir, timestamp)
    ensure_directory_exists(timestamped_dir)

    return timestamped_dir


def validate_json_file(file_path: str, required_keys: Sequence[str] = ()) -> Tuple[bool, str]:
    """
    Validate that a file holds a JSON object with the given keys.

    Args:
        file_path: Path to the file to validate.
        required_keys: Keys the top-level object must have.

    Returns:
        A tuple of (is_valid, error_message) where error_message is empty
        when the file is valid.
    """
    if not os.path.exists(file_path):
        return False, f"File does not exist: {file_path}"

    if os.path.getsize(file_path) == 0:
        return False, f"File is empty: {file_path}"

    try:
        data = load_json(file_path)
    except json.JSONDecodeError as e:
        return False, f"File is not valid JSON: {file_path} ({e.msg} at line {e.lineno})"

    if not isinstance(data, dict):
        return False, f"Expected a JSON object in {file_path}"

    missing = [key for key in required_keys if key not in data]
    if missing:
        return False, f"Missing keys in {file_path}: {', '.join(missing)}"

    return True, ""


def validate_input_files(files: Dict[str, Tuple[str, Sequence[str]]]) -> List[str]:
    """
    Validate several named input files at once.

    Args:
        files: Mapping from a label to (path, required keys).

    Returns:
        Error messages, one per invalid file.
    """
    errors = []
    for label, (path, keys) in files.items():
        is_valid, message = validate_json_file(path, keys)
        if not is_valid:
            errors.append(f"{label}: {message}")
    return errors
