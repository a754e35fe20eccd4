"""CSV plumbing shared by the toolkit's file formats.

Every emitted file is comma separated with a header row, ``.`` decimals and
LF line endings. Floats are formatted with ``repr`` so a parse/serialize
round trip is byte identical. Comment lines start with ``#`` and may carry
``key=value`` metadata.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

__all__ = [
    "fmt_float",
    "write_text_atomic",
    "read_csv_table",
    "read_xy_csv",
]


def fmt_float(value: float) -> str:
    """Shortest exact decimal form of ``value`` (round-trips via float())."""
    return repr(float(value))


def write_text_atomic(path: str | Path, text: str) -> Path:
    """Write ``text`` to ``path`` via a temp file in the same directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    return path


def read_csv_table(
    path: str | Path, expected_header: str | None = None
) -> tuple[dict[str, str], str, list[list[str]]]:
    """Read a small CSV file into (comment metadata, header, rows of fields).

    ``expected_header`` enforces an exact header line when given; otherwise
    the first non-comment line is taken as the header, whatever it is.
    """
    path = Path(path)
    comments: dict[str, str] = {}
    rows: list[list[str]] = []
    header: str | None = None
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                comments[key.strip()] = value.strip()
            continue
        if header is None:
            if expected_header is not None and line != expected_header:
                raise ValueError(
                    f"{path}: line {lineno}: expected header {expected_header!r}, "
                    f"got {line!r}"
                )
            header = line
            continue
        rows.append([field.strip() for field in line.split(",")])
    if header is None:
        raise ValueError(f"{path}: no header row found")
    return comments, header, rows


def read_xy_csv(path: str | Path) -> np.ndarray:
    """Read a two-column numeric CSV (any header) into an (n, 2) array."""
    _, header, rows = read_csv_table(path)
    if len(header.split(",")) != 2:
        raise ValueError(f"{path}: expected a two-column CSV, header is {header!r}")
    try:
        data = np.array([[float(a), float(b)] for a, b in rows], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric row in two-column CSV: {exc}") from None
    if data.size == 0:
        raise ValueError(f"{path}: no data rows")
    return data
