"""Matrix file ingestion and emission: CSV (rows of the file are rows of the
matrix) and MatrixMarket (array and coordinate flavors, via scipy)."""
from __future__ import annotations

import numpy as np
import scipy.io
import scipy.sparse

__all__ = ["MatrixParseError", "load_matrix", "save_matrix", "detect_format"]


class MatrixParseError(ValueError):
    """Unreadable matrix file; the message names the offending row/column."""


def detect_format(path: str) -> str:
    lower = str(path).lower()
    if lower.endswith((".mtx", ".mm", ".mtx.gz")):
        return "matrixmarket"
    return "csv"


def load_matrix(path: str, fmt: str | None = None) -> np.ndarray:
    fmt = fmt or detect_format(path)
    if fmt == "csv":
        return _load_csv(path)
    if fmt == "matrixmarket":
        try:
            mat = scipy.io.mmread(path)
        except Exception as exc:
            raise MatrixParseError(f"{path}: not a readable MatrixMarket file: {exc}") from exc
        if scipy.sparse.issparse(mat):
            mat = mat.toarray()
        return np.asarray(mat, dtype=float)
    raise MatrixParseError(f"unknown format {fmt!r} (expected 'csv' or 'matrixmarket')")


def _load_csv(path: str) -> np.ndarray:
    rows: list[list[float]] = []
    with open(path, "r") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = stripped.split(",")
            row = []
            for col_no, fieldtext in enumerate(fields, start=1):
                try:
                    row.append(float(fieldtext))
                except ValueError:
                    raise MatrixParseError(
                        f"{path}: row {line_no}, column {col_no}: "
                        f"cannot parse {fieldtext.strip()!r} as a number"
                    ) from None
            if rows and len(row) != len(rows[0]):
                raise MatrixParseError(
                    f"{path}: row {line_no} has {len(row)} fields, expected {len(rows[0])}"
                )
            rows.append(row)
    if not rows:
        raise MatrixParseError(f"{path}: no data rows found")
    return np.asarray(rows, dtype=float)


def save_matrix(path: str, matrix, fmt: str | None = None) -> None:
    """Write with 17 significant digits so a round trip is lossless."""
    fmt = fmt or detect_format(path)
    arr = np.asarray(matrix, dtype=float)
    if fmt == "csv":
        np.savetxt(path, arr, fmt="%.17g", delimiter=",")
    elif fmt == "matrixmarket":
        scipy.io.mmwrite(path, arr, precision=17)
    else:
        raise MatrixParseError(f"unknown format {fmt!r} (expected 'csv' or 'matrixmarket')")
