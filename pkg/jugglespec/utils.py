"""
Utility functions for jugglespec outputs.
"""

import csv
import json
import os
import re
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
import yaml


def sanitize_filename(filename: str) -> str:
    """
    Sanitize a string to be used as a filename.

    Args:
        filename: The filename to sanitize

    Returns:
        str: Sanitized filename
    """
    # Replace spaces and arrows with underscores
    sanitized = filename.replace(' ', '_').replace('->', '_to_')

    # Remove non-alphanumeric characters except underscores and hyphens
    sanitized = re.sub(r'[^\w\-]', '', sanitized)

    sanitized = sanitized.lower()

    if not sanitized:
        sanitized = "run"

    return sanitized


def resolve_output_dir(output_dir: Optional[Path]) -> Path:
    """
    Directory for experiment artifacts, created if needed.

    Under pytest, runs without an explicit directory write to ``test_output``.

    Args:
        output_dir: Requested directory or None

    Returns:
        Path: Existing output directory
    """
    if output_dir is None:
        output_dir = Path("test_output") if 'pytest' in sys.modules else Path("output")
    os.makedirs(output_dir, exist_ok=True)
    return Path(output_dir)


def _plain(value: Any) -> Any:
    """Convert numpy values and paths into JSON/YAML friendly types."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    return value


def write_jsonl(path: Path, records: Iterable[Dict[str, Any]]) -> int:
    """
    Write one JSON object per line.

    Args:
        path: Output file
        records: Records to write

    Returns:
        int: Number of records written
    """
    count = 0
    with open(path, "w") as handle:
        for record in records:
            handle.write(json.dumps(_plain(record)) + "\n")
            count += 1
    return count


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    """
    Write a CSV file with a header row.

    Returns:
        int: Number of data rows written
    """
    count = 0
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow(_plain(list(row)))
            count += 1
    return count


def format_results(results: Dict[str, Any], format_type: str) -> str:
    """
    Format experiment results.

    Args:
        results: The results mapping
        format_type: The format type (json, yaml)

    Returns:
        str: Formatted results

    Raises:
        ValueError: If the format is not supported
    """
    if format_type.lower() == 'json':
        return json.dumps(_plain(results), indent=2)
    elif format_type.lower() == 'yaml':
        return yaml.dump(_plain(results), default_flow_style=False, sort_keys=False)
    else:
        raise ValueError(f"Unsupported output format: {format_type}")


def summarize(values: List[float]) -> Dict[str, float]:
    """Count, mean, median and 95th percentile of a sample; zeros when empty."""
    if not values:
        return {"count": 0, "mean": 0.0, "median": 0.0, "p95": 0.0}
    data = np.asarray(values, dtype=float)
    return {
        "count": int(data.size),
        "mean": float(data.mean()),
        "median": float(np.median(data)),
        "p95": float(np.percentile(data, 95)),
    }
