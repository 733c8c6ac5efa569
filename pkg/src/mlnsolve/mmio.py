"""Matrix Market reader and writer.

Coordinate files (real, integer or complex; general, symmetric, hermitian or
skew-symmetric) are read into general CSR storage. Array files are read as
dense right-hand-side vectors. Files ending in ``.gz`` are decompressed on
the fly.
"""
from __future__ import annotations

import gzip
from pathlib import Path

import numpy as np

from .sparse import CsrMatrix

__all__ = [
    "MatrixMarketError",
    "read_matrix_market",
    "read_matrix_market_array",
    "write_matrix_market",
    "write_matrix_market_array",
]

_FIELDS = {"real", "integer", "complex"}
_SYMMETRIES = {"general", "symmetric", "hermitian", "skew-symmetric"}


class MatrixMarketError(ValueError):
    pass


def _open(path, mode="rt"):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, mode)
    return open(path, mode)


def _parse_banner(line: str):
    tokens = line.strip().split()
    if len(tokens) != 5 or tokens[0] != "%%MatrixMarket" or tokens[1].lower() != "matrix":
        raise MatrixMarketError(f"malformed banner: {line.strip()!r}")
    fmt, field, symmetry = (t.lower() for t in tokens[2:])
    if fmt not in ("coordinate", "array"):
        raise MatrixMarketError(f"unknown format {fmt!r}")
    if field == "pattern":
        raise MatrixMarketError("pattern matrices are not supported")
    if field not in _FIELDS:
        raise MatrixMarketError(f"unsupported field {field!r}")
    if symmetry not in _SYMMETRIES:
        raise MatrixMarketError(f"unsupported symmetry {symmetry!r}")
    return fmt, field, symmetry


def _data_lines(fh):
    for line in fh:
        s = line.strip()
        if s and not s.startswith("%"):
            yield s


def _read(path):
    with _open(path) as fh:
        banner = fh.readline()
        fmt, field, symmetry = _parse_banner(banner)
        lines = _data_lines(fh)
        try:
            size = next(lines).split()
        except StopIteration:
            raise MatrixMarketError("missing size line") from None
        body = list(lines)
    return fmt, field, symmetry, size, body


def _parse_numbers(body, ncols_expected, path):
    try:
        table = np.array([ln.split() for ln in body], dtype=np.float64)
    except ValueError as exc:
        raise MatrixMarketError(f"{path}: bad numeric entry ({exc})") from None
    if table.size == 0:
        return table.reshape(0, ncols_expected)
    if table.ndim != 2 or table.shape[1] != ncols_expected:
        raise MatrixMarketError(f"{path}: expected {ncols_expected} columns per entry")
    return table


def read_matrix_market(path, rhs_path=None):
    """Read a coordinate-format matrix, optionally with an array-format rhs.

    Returns ``(A, b)`` where ``b`` is ``None`` unless ``rhs_path`` is given.
    """
    fmt, field, symmetry, size, body = _read(path)
    if fmt != "coordinate":
        raise MatrixMarketError(f"{path}: matrix must be in coordinate format")
    if len(size) != 3:
        raise MatrixMarketError(f"{path}: size line must be 'nrows ncols nnz'")
    nrows, ncols, nnz = (int(t) for t in size)
    if len(body) != nnz:
        raise MatrixMarketError(f"{path}: declared {nnz} entries, found {len(body)}")
    width = 4 if field == "complex" else 3
    table = _parse_numbers(body, width, path)
    rows = table[:, 0].astype(np.int64) - 1
    cols = table[:, 1].astype(np.int64) - 1
    if nnz and (rows.min() < 0 or rows.max() >= nrows or cols.min() < 0 or cols.max() >= ncols):
        raise MatrixMarketError(f"{path}: index outside declared {nrows}x{ncols} bounds")
    if field == "complex":
        vals = table[:, 2] + 1j * table[:, 3]
    else:
        vals = table[:, 2].copy()

    if symmetry != "general":
        off = rows != cols
        mirror = vals[off]
        if symmetry == "skew-symmetric":
            mirror = -mirror
        elif symmetry == "hermitian":
            mirror = np.conj(mirror)
        rows, cols, vals = (np.concatenate([rows, cols[off]]),
                            np.concatenate([cols, rows[off]]),
                            np.concatenate([vals, mirror]))
    A = CsrMatrix.from_coo((nrows, ncols), rows, cols, vals)
    b = read_matrix_market_array(rhs_path) if rhs_path is not None else None
    return A, b


def read_matrix_market_array(path) -> np.ndarray:
    """Read a dense array-format file as a flat vector (column-major order)."""
    fmt, field, _, size, body = _read(path)
    if fmt != "array":
        raise MatrixMarketError(f"{path}: expected array format")
    if len(size) != 2:
        raise MatrixMarketError(f"{path}: size line must be 'nrows ncols'")
    nrows, ncols = (int(t) for t in size)
    if len(body) != nrows * ncols:
        raise MatrixMarketError(f"{path}: expected {nrows * ncols} values, found {len(body)}")
    table = _parse_numbers(body, 2 if field == "complex" else 1, path)
    if field == "complex":
        return table[:, 0] + 1j * table[:, 1]
    return table[:, 0].copy()


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_matrix_market(path, A: CsrMatrix, comment: str | None = None) -> None:
    """Write ``A`` as a coordinate general file with 17 significant digits."""
    field = "complex" if A.is_complex else "real"
    rows = np.repeat(np.arange(A.shape[0]), np.diff(A.row_ptr)) + 1
    cols = A.col_idx + 1
    with _open(path, "wt") as fh:
        fh.write(f"%%MatrixMarket matrix coordinate {field} general\n")
        if comment:
            for line in comment.splitlines():
                fh.write(f"% {line}\n")
        fh.write(f"{A.shape[0]} {A.shape[1]} {A.nnz}\n")
        if A.is_complex:
            for i, j, v in zip(rows, cols, A.values):
                fh.write(f"{i} {j} {_fmt(v.real)} {_fmt(v.imag)}\n")
        else:
            for i, j, v in zip(rows, cols, A.values):
                fh.write(f"{i} {j} {_fmt(v)}\n")


def write_matrix_market_array(path, v) -> None:
    v = np.asarray(v).ravel()
    field = "complex" if np.iscomplexobj(v) else "real"
    with _open(path, "wt") as fh:
        fh.write(f"%%MatrixMarket matrix array {field} general\n")
        fh.write(f"{v.size} 1\n")
        if field == "complex":
            for z in v:
                fh.write(f"{_fmt(z.real)} {_fmt(z.imag)}\n")
        else:
            for x in v:
                fh.write(f"{_fmt(x)}\n")
