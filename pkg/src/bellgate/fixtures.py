"""Paths to the reference data files bundled with the package.

``table1.csv`` -- measured singles/coincidence rates of the reference
bench (dark, gate off, gate on), in the count-record CSV layout.
``table2.csv`` -- the bench's 16-setting coincidence table, cells
``count-accidental``.
``reference_bench.json`` / ``demo.json`` -- ready-to-run configurations.
"""

from __future__ import annotations

from pathlib import Path

_DATA_DIR = Path(__file__).resolve().parent / "data"


def fixture_path(name: str) -> Path:
    """Absolute path of a bundled data file; raises if it does not exist."""
    path = _DATA_DIR / name
    if not path.is_file():
        raise FileNotFoundError(f"no bundled fixture named {name!r}")
    return path
