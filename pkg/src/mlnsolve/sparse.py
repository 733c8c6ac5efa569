"""Dense vectors, CSR matrices and the inner products used by the solvers.

Scalars are either ``float64`` or ``complex128``; a real problem is solved in
real arithmetic throughout. Every inner product is conjugate-linear in its
first argument, ``dot_hermitian(u, v) = u^H v``.
"""
from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from . import _kernels

__all__ = [
    "DimensionMismatch",
    "OpCounter",
    "CsrMatrix",
    "work_dtype",
    "matvec",
    "matvec_hermitian",
    "dot_hermitian",
    "norm2",
]


class DimensionMismatch(ValueError):
    pass


@dataclass
class OpCounter:
    """Tally of the vector kernels executed by a solver run."""

    matvecs: int = 0
    hermitian_matvecs: int = 0
    precond_applies: int = 0
    hermitian_solves: int = 0
    dots: int = 0
    norms: int = 0
    saxpys: int = 0
    scales: int = 0

    def as_dict(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def work_dtype(*arrays) -> np.dtype:
    """Return float64 for all-real inputs, complex128 otherwise."""
    if any(np.iscomplexobj(a) for a in arrays):
        return np.dtype(np.complex128)
    return np.dtype(np.float64)


class CsrMatrix:
    """Compressed sparse row matrix.

    Column indices are strictly increasing within each row. Construct from
    triplets with :meth:`from_coo` when the input may be unsorted or contain
    duplicates.
    """

    __slots__ = ("shape", "row_ptr", "col_idx", "values")

    def __init__(self, shape, row_ptr, col_idx, values, check=True):
        nrows, ncols = (int(s) for s in shape)
        self.shape = (nrows, ncols)
        self.row_ptr = np.ascontiguousarray(row_ptr, dtype=np.int64)
        self.col_idx = np.ascontiguousarray(col_idx, dtype=np.int64)
        values = np.asarray(values)
        dtype = np.complex128 if np.iscomplexobj(values) else np.float64
        self.values = np.ascontiguousarray(values, dtype=dtype)
        if check:
            self._validate()

    def _validate(self):
        nrows, ncols = self.shape
        if nrows < 1 or ncols < 1:
            raise ValueError(f"matrix dimensions must be positive, got {self.shape}")
        rp = self.row_ptr
        if rp.shape != (nrows + 1,):
            raise ValueError("row_ptr must have nrows + 1 entries")
        if rp[0] != 0 or np.any(np.diff(rp) < 0):
            raise ValueError("row_ptr must start at 0 and be nondecreasing")
        nnz = int(rp[-1])
        if self.col_idx.shape != (nnz,) or self.values.shape != (nnz,):
            raise ValueError("col_idx and values must have row_ptr[-1] entries")
        if nnz:
            if self.col_idx.min() < 0 or self.col_idx.max() >= ncols:
                raise ValueError("column index out of range")
            # strictly increasing inside each row: a non-increase is only
            # allowed where a new row starts
            step = np.diff(self.col_idx) <= 0
            row_starts = np.zeros(nnz, dtype=bool)
            row_starts[rp[1:-1][rp[1:-1] < nnz]] = True
            if np.any(step & ~row_starts[1:]):
                raise ValueError("column indices must be strictly increasing within rows")

    @property
    def nnz(self) -> int:
        return int(self.row_ptr[-1])

    @property
    def dtype(self) -> np.dtype:
        return self.values.dtype

    @property
    def is_complex(self) -> bool:
        return self.values.dtype.kind == "c"

    @classmethod
    def from_coo(cls, shape, rows, cols, vals, sum_duplicates=True):
        """Build from 0-based triplets; duplicates are summed."""
        nrows, ncols = (int(s) for s in shape)
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals)
        if not (rows.shape == cols.shape == vals.shape):
            raise ValueError("rows, cols and vals must have the same length")
        if rows.size and (rows.min() < 0 or rows.max() >= nrows
                          or cols.min() < 0 or cols.max() >= ncols):
            raise ValueError("triplet index out of range")
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size:
            new = np.ones(rows.size, dtype=bool)
            new[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            if not new.all():
                if not sum_duplicates:
                    raise ValueError("duplicate entries")
                starts = np.flatnonzero(new)
                vals = np.add.reduceat(vals, starts)
                rows, cols = rows[starts], cols[starts]
        row_ptr = np.zeros(nrows + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=nrows), out=row_ptr[1:])
        return cls((nrows, ncols), row_ptr, cols, vals, check=False)

    @classmethod
    def from_dense(cls, a, drop_zeros=True):
        a = np.asarray(a)
        if a.ndim != 2:
            raise ValueError("expected a 2-D array")
        mask = a != 0 if drop_zeros else np.ones(a.shape, dtype=bool)
        rows, cols = np.nonzero(mask)
        return cls.from_coo(a.shape, rows, cols, a[rows, cols])

    @classmethod
    def identity(cls, n, dtype=np.float64):
        idx = np.arange(n)
        return cls((n, n), np.arange(n + 1), idx, np.ones(n, dtype=dtype), check=False)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=self.dtype)
        rows = np.repeat(np.arange(self.shape[0]), np.diff(self.row_ptr))
        out[rows, self.col_idx] = self.values
        return out

    def copy(self) -> CsrMatrix:
        return CsrMatrix(self.shape, self.row_ptr.copy(), self.col_idx.copy(),
                         self.values.copy(), check=False)

    def diagonal_positions(self) -> np.ndarray:
        """Index into ``values`` of each diagonal entry, -1 where absent."""
        n = min(self.shape)
        pos = np.full(n, -1, dtype=np.int64)
        for i in range(n):
            lo, hi = self.row_ptr[i], self.row_ptr[i + 1]
            k = lo + np.searchsorted(self.col_idx[lo:hi], i)
            if k < hi and self.col_idx[k] == i:
                pos[i] = k
        return pos

    def same_structure(self, other: CsrMatrix) -> bool:
        return (self.shape == other.shape
                and np.array_equal(self.row_ptr, other.row_ptr)
                and np.array_equal(self.col_idx, other.col_idx))

    def __matmul__(self, v):
        return matvec(self, v)

    def __repr__(self):
        return f"CsrMatrix(shape={self.shape}, nnz={self.nnz}, dtype={self.dtype})"


def _check_vec(v, n, what="vector"):
    v = np.asarray(v)
    if v.ndim != 1 or v.shape[0] != n:
        raise DimensionMismatch(f"{what} has shape {v.shape}, expected ({n},)")
    return v


def _prepare(A: CsrMatrix, v, n_in, n_out, out):
    v = _check_vec(v, n_in)
    dtype = work_dtype(A.values, v)
    if v.dtype != dtype:
        v = v.astype(dtype)
    if out is None:
        out = np.empty(n_out, dtype=dtype)
    elif out.shape != (n_out,) or out.dtype != dtype:
        raise DimensionMismatch(f"out buffer must be ({n_out},) {dtype}")
    return v, out


def matvec(A: CsrMatrix, v, out=None, counter: OpCounter | None = None) -> np.ndarray:
    """Return ``A @ v``, written into ``out`` when given."""
    v, out = _prepare(A, v, A.shape[1], A.shape[0], out)
    _kernels.csr_matvec(A.row_ptr, A.col_idx, A.values, v, out)
    if counter is not None:
        counter.matvecs += 1
    return out


def matvec_hermitian(A: CsrMatrix, v, out=None, counter: OpCounter | None = None) -> np.ndarray:
    """Return ``A^H @ v`` without forming the conjugate transpose."""
    v, out = _prepare(A, v, A.shape[0], A.shape[1], out)
    _kernels.csr_rmatvec_conj(A.row_ptr, A.col_idx, A.values, v, out)
    if counter is not None:
        counter.hermitian_matvecs += 1
    return out


def dot_hermitian(u, v, counter: OpCounter | None = None):
    """``sum(conj(u) * v)``."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.ndim != 1 or u.shape != v.shape:
        raise DimensionMismatch(f"dot of shapes {u.shape} and {v.shape}")
    if counter is not None:
        counter.dots += 1
    return np.vdot(u, v)


def norm2(v, counter: OpCounter | None = None) -> float:
    v = np.asarray(v)
    if counter is not None:
        counter.norms += 1
    return float(np.sqrt(np.vdot(v, v).real))
