"""Deterministic plain-text emission for sweep results.

Every table is CSV with a ``#``-prefixed header block that echoes the full
effective configuration, so any file alone suffices to rerun its cell.
Floats are written with ``repr`` (shortest round-trip form), writes are
atomic (temp file + rename), and nothing time- or host-dependent enters the
output: identical inputs give byte-identical files.
"""
from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

__all__ = [
    "format_value",
    "write_table",
    "read_table",
    "write_metadata",
    "read_metadata",
]


def format_value(value) -> str:
    """Scalar -> stable text that round-trips through ``read_table``."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (complex, np.complexfloating)):
        raise TypeError("write complex data as separate re/im columns")
    return str(value)


def _parse_cell(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_table(path, columns: dict, header: dict | None = None) -> None:
    """Write named columns as CSV under a ``# key = value`` header block.

    ``columns`` maps name -> 1-d sequence; all columns must have equal
    length.  Header values are JSON-encoded so structured knobs (grids,
    tuples) survive the round trip.
    """
    path = Path(path)
    names = list(columns)
    if not names:
        raise ValueError("need at least one column")
    cols = [np.atleast_1d(np.asarray(columns[n])) for n in names]
    lengths = {c.shape[0] for c in cols}
    if len(lengths) != 1:
        raise ValueError(f"column lengths differ: "
                         f"{dict(zip(names, (c.shape[0] for c in cols)))}")
    lines = []
    for key, value in (header or {}).items():
        lines.append(f"# {key} = {json.dumps(value)}")
    lines.append("# columns: " + ",".join(names))
    for row in zip(*cols):
        lines.append(",".join(format_value(x) for x in row))
    path.parent.mkdir(parents=True, exist_ok=True)
    _atomic_write(path, "\n".join(lines) + "\n")


def read_table(path):
    """Inverse of ``write_table``: returns (header dict, column dict).

    Numeric columns come back as float or int arrays, anything else as
    object arrays of strings.
    """
    header: dict = {}
    names: list[str] | None = None
    rows: list[list] = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("columns:"):
                    names = [n.strip() for n in
                             body[len("columns:"):].split(",")]
                elif "=" in body:
                    key, _, value = body.partition("=")
                    try:
                        header[key.strip()] = json.loads(value.strip())
                    except json.JSONDecodeError:
                        header[key.strip()] = value.strip()
                continue
            rows.append([_parse_cell(c) for c in line.split(",")])
    if names is None:
        raise ValueError(f"{path}: missing '# columns:' line")
    if any(len(r) != len(names) for r in rows):
        raise ValueError(f"{path}: ragged rows")
    columns = {}
    for i, name in enumerate(names):
        cells = [r[i] for r in rows]
        if all(isinstance(c, int) for c in cells):
            columns[name] = np.asarray(cells, dtype=int)
        elif all(isinstance(c, (int, float)) for c in cells):
            columns[name] = np.asarray(cells, dtype=float)
        else:
            columns[name] = np.asarray([str(c) for c in cells], dtype=object)
    return header, columns


def write_metadata(path, payload: dict) -> None:
    """Sibling machine-readable run record (sorted keys, atomic write)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    _atomic_write(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def read_metadata(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
