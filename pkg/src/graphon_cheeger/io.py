"""Kernel file formats and canonical JSON emission.

Formats:
  dense-text: first line n, then n lines of n whitespace-separated reals.
  csv:        n rows of n comma-separated reals (RFC-4180, no header).
  json:       {"n": ..., "kernel": [[...], ...]}.

Emitted JSON is canonical - sorted keys, floats printed with 17 significant
digits (lossless round-trip), non-finite values as null - so identical
inputs produce byte-identical files.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError, ValueOutOfRangeError
from .graphon import StepGraphon, new_graphon

FORMATS = ("dense-text", "csv", "json")


def _check_entries(rows: list[list[float]]) -> None:
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            if not math.isfinite(v) or v < 0.0 or v > 1.0:
                raise ValueOutOfRangeError(f"kernel entry {v!r} at row {i}, col {j} outside [0, 1]")


def _parse_dense_text(text: str, path: str) -> list[list[float]]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError(f"{path}: empty file")
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise ParseError(f"{path}: line 1 must be the cell count, got {lines[0].strip()!r}") from None
    if len(lines) != n + 1:
        raise ParseError(f"{path}: expected {n} matrix rows after the header, got {len(lines) - 1}")
    rows = []
    for i, ln in enumerate(lines[1:], start=2):
        toks = ln.split()
        if len(toks) != n:
            raise ParseError(f"{path}: line {i} has {len(toks)} entries, expected {n}")
        try:
            rows.append([float(t) for t in toks])
        except ValueError as exc:
            raise ParseError(f"{path}: line {i}: {exc}") from None
    return rows


def _parse_csv(text: str, path: str) -> list[list[float]]:
    rows = []
    for i, rec in enumerate(csv.reader(text.splitlines()), start=1):
        if not rec:
            continue
        try:
            rows.append([float(t) for t in rec])
        except ValueError as exc:
            raise ParseError(f"{path}: row {i}: {exc}") from None
    if not rows:
        raise ParseError(f"{path}: empty csv")
    width = len(rows[0])
    for i, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ParseError(f"{path}: row {i} has {len(row)} entries, expected {width}")
    return rows


def _parse_json_kernel(text: str, path: str) -> list[list[float]]:
    import json as _json

    try:
        obj = _json.loads(text)
    except _json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(obj, dict) or "kernel" not in obj:
        raise ParseError(f"{path}: expected an object with a 'kernel' field")
    kernel = obj["kernel"]
    if not isinstance(kernel, list) or not all(isinstance(r, list) for r in kernel):
        raise ParseError(f"{path}: 'kernel' must be a list of rows")
    rows = []
    for i, row in enumerate(kernel):
        out = []
        for j, v in enumerate(row):
            if v is None or isinstance(v, (bool, str)):
                raise ParseError(f"{path}: kernel[{i}][{j}] is not a number")
            out.append(float(v))
        rows.append(out)
    if "n" in obj and obj["n"] != len(rows):
        raise ParseError(f"{path}: declared n = {obj['n']} but kernel has {len(rows)} rows")
    return rows


def load_graphon(path, format: str = "dense-text", require_connected: bool = True) -> StepGraphon:
    """Load a kernel file and validate it into a step graphon."""
    if format not in FORMATS:
        raise ParseError(f"unknown format {format!r}; choose from {FORMATS}")
    text = Path(path).read_text()
    name = str(path)
    if format == "dense-text":
        rows = _parse_dense_text(text, name)
    elif format == "csv":
        rows = _parse_csv(text, name)
    else:
        rows = _parse_json_kernel(text, name)
    if any(len(r) != len(rows) for r in rows):
        raise ParseError(f"{name}: kernel must be square, got {len(rows)} rows of width {len(rows[0])}")
    _check_entries(rows)
    return new_graphon(rows, require_connected=require_connected)


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def _canonical(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"  # JSON has no infinities; extended values surface as null
        return format_float(x)
    if isinstance(obj, str):
        import json as _json

        return _json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted(obj.items(), key=lambda kv: kv[0])
        body = ",".join(f"{_canonical(str(k))}:{_canonical(v)}" for k, v in items)
        return "{" + body + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_canonical(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return _canonical(obj.tolist())
    if is_dataclass(obj):
        return _canonical(asdict(obj))
    raise TypeError(f"cannot canonicalize {type(obj).__name__}")


def canonical_json(obj) -> str:
    """Deterministic JSON text: sorted keys, 17-significant-digit floats."""
    return _canonical(obj) + "\n"


def save_graphon_json(W: StepGraphon, path) -> None:
    doc = {"n": W.n, "kernel": [[float(v) for v in row] for row in W.kernel]}
    Path(path).write_text(canonical_json(doc))


def write_csv(path, header: list[str], rows: list[list]) -> None:
    """RFC-4180 CSV with a header row; floats at 17 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [format_float(v) if isinstance(v, (float, np.floating)) else v for v in row]
            )
