"""Reading and writing embedding files and experiment tables.

Embedding files come in two formats:

* CSV with header ``id,c0,c1,...`` and one embedding per row;
* JSONL with one ``{"id": ..., "vector": [...]}`` object per line.

Floats are written with ``repr`` (shortest round-trip form) unless a table
asks for fixed 17-significant-digit rendering. Output is UTF-8 with ``\\n``
line endings regardless of platform.
"""

import csv
import io as _io
import json
import math
from pathlib import Path

import numpy as np

from .exceptions import ParseError

__all__ = [
    "detect_format",
    "read_embeddings",
    "write_embeddings",
    "format_g17",
    "write_csv_table",
    "curve_to_csv",
]


def detect_format(path, fmt=None):
    if fmt is not None:
        if fmt not in ("csv", "jsonl"):
            raise ValueError(f"format must be 'csv' or 'jsonl', got {fmt!r}")
        return fmt
    suffix = Path(path).suffix.lower()
    if suffix == ".csv":
        return "csv"
    if suffix in (".jsonl", ".ndjson"):
        return "jsonl"
    raise ValueError(f"cannot infer embedding format from {path!s}; pass fmt='csv' or 'jsonl'")


def _to_float(token, line):
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"not a number: {token!r}", line=line) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value {token!r}", line=line)
    return value


def _read_csv(text):
    reader = csv.reader(_io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty file", line=1) from None
    if not header or header[0].strip() != "id" or len(header) < 2:
        raise ParseError("header must be 'id,c0,c1,...'", line=1)
    d = len(header) - 1
    ids, rows = [], []
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != d + 1:
            raise ParseError(f"expected {d + 1} fields, got {len(row)}", line=line)
        ids.append(row[0])
        rows.append([_to_float(cell, line) for cell in row[1:]])
    return ids, rows


def _read_jsonl(text):
    ids, rows = [], []
    d = None
    for line, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", line=line) from None
        if not isinstance(doc, dict) or "vector" not in doc:
            raise ParseError("expected an object with a 'vector' field", line=line)
        vec = doc["vector"]
        if not isinstance(vec, list) or not vec:
            raise ParseError("'vector' must be a non-empty list", line=line)
        if d is None:
            d = len(vec)
        elif len(vec) != d:
            raise ParseError(f"vector has dim {len(vec)}, expected {d}", line=line)
        if any(isinstance(v, bool) or not isinstance(v, (int, float, str)) for v in vec):
            raise ParseError("vector entries must be numbers", line=line)
        ids.append(str(doc.get("id", len(ids))))
        rows.append([_to_float(v, line) for v in vec])
    return ids, rows


def read_embeddings(path, fmt=None):
    """Load an embedding file.

    Returns
    -------
    ids : list of str
    X : ndarray, shape (n, d)

    Raises
    ------
    ParseError
        With the offending line number for malformed content.
    """
    fmt = detect_format(path, fmt)
    text = Path(path).read_text(encoding="utf-8")
    ids, rows = _read_csv(text) if fmt == "csv" else _read_jsonl(text)
    if not rows:
        return ids, np.empty((0, 0))
    return ids, np.asarray(rows, dtype=np.float64)


def write_embeddings(path, X, ids=None, fmt=None):
    """Write the rows of ``X`` in CSV (``id,c0,...``) or JSONL form."""
    X = np.asarray(X, dtype=np.float64)
    fmt = detect_format(path, fmt)
    ids = list(range(X.shape[0])) if ids is None else list(ids)
    if fmt == "csv":
        header = ["id"] + [f"c{j}" for j in range(X.shape[1])]
        rows = [[i, *(repr(float(v)) for v in row)] for i, row in zip(ids, X)]
        write_csv_table(path, header, rows)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for i, row in zip(ids, X):
                fh.write(json.dumps({"id": i, "vector": [float(v) for v in row]}) + "\n")


def format_g17(value):
    """17 significant digits, trailing zeros dropped (``90.0 -> '90'``)."""
    return format(float(value), ".17g")


def write_csv_table(dest, header, rows):
    """Write a CSV table to a path or an open text stream."""
    if hasattr(dest, "write"):
        writer = csv.writer(dest, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return
    with open(dest, "w", encoding="utf-8", newline="") as fh:
        write_csv_table(fh, header, rows)


CURVE_HEADER = ("theta_deg", "cosine_distance", "half_sq_euclidean")


def curve_to_csv(dest, curve):
    """Write an equivalence-curve table (see :func:`gauge_lab.geometry.equivalence_curve`)."""
    write_csv_table(dest, CURVE_HEADER, [[format_g17(v) for v in row] for row in curve])
