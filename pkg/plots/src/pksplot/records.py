"""Strict reader for simulator records files.

The upstream CSV is a plain header line followed by float rows; NaN appears
where a monitor is undefined. Parsing goes through ``float()`` so every value
written with full precision is recovered exactly.
"""

from __future__ import annotations

import numpy as np

__all__ = ["read_records"]


def read_records(path: str) -> tuple[list[str], np.ndarray]:
    """Column names and a (rows, columns) float array from a records CSV.

    Header-only files yield a (0, n) array; a file without even a header,
    a ragged row, or a non-numeric field is an error.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line for line in fh.read().splitlines() if line.strip()]
    if not lines:
        raise ValueError(f"records file {path} is empty")
    columns = [name.strip() for name in lines[0].split(",")]
    data = np.empty((len(lines) - 1, len(columns)))
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(columns):
            raise ValueError(
                f"line {i} of {path} has {len(parts)} fields, header has {len(columns)}"
            )
        try:
            data[i - 2] = [float(part) for part in parts]
        except ValueError:
            raise ValueError(f"line {i} of {path} contains a non-numeric field") from None
    return columns, data
