"""ILU(0) and identity preconditioners.

A preconditioner ``M`` exposes ``solve`` (``M^{-1} v``) and
``solve_hermitian`` (``M^{-H} v``). The module-level ``apply_*`` helpers add
operation counting on top.
"""
from __future__ import annotations

import numpy as np

from . import _kernels
from .sparse import CsrMatrix, DimensionMismatch, OpCounter, work_dtype

__all__ = [
    "FactorizationError",
    "ZeroPivot",
    "MissingDiagonal",
    "IdentityPreconditioner",
    "Ilu0Factors",
    "ilu0_factorize",
    "apply_m_inverse",
    "apply_m_inv_hermitian",
]


class FactorizationError(ArithmeticError):
    def __init__(self, row: int, message: str):
        super().__init__(message)
        self.row = row


class ZeroPivot(FactorizationError):
    def __init__(self, row: int):
        super().__init__(row, f"zero pivot in ILU(0) at row {row}")


class MissingDiagonal(FactorizationError):
    def __init__(self, row: int):
        super().__init__(row, f"no stored diagonal entry in row {row}")


def _prepare(v, n, dtype, out):
    v = np.asarray(v)
    if v.shape != (n,):
        raise DimensionMismatch(f"vector has shape {v.shape}, expected ({n},)")
    dtype = work_dtype(np.empty(0, dtype=dtype), v)
    if v.dtype != dtype:
        v = v.astype(dtype)
    if out is None:
        out = np.empty(n, dtype=dtype)
    elif out.shape != (n,) or out.dtype != dtype:
        raise DimensionMismatch(f"out buffer must be ({n},) {dtype}")
    return v, out


class IdentityPreconditioner:
    """``M = I``; turns the preconditioned solver into the plain one."""

    name = "none"

    def __init__(self, n: int | None = None):
        self.n = n

    def solve(self, v, out=None):
        v = np.asarray(v)
        if self.n is not None and v.shape != (self.n,):
            raise DimensionMismatch(f"vector has shape {v.shape}, expected ({self.n},)")
        if out is None:
            return v.copy()
        out[...] = v
        return out

    solve_hermitian = solve


class Ilu0Factors:
    """Zero fill-in incomplete LU factors of a square CSR matrix.

    ``combined`` stores the strict lower part of L (unit diagonal implied)
    and all of U on exactly the sparsity pattern of A.
    """

    name = "ilu0"

    def __init__(self, combined: CsrMatrix, diag_ptr: np.ndarray):
        self.combined = combined
        self.diag_ptr = diag_ptr

    @property
    def n(self) -> int:
        return self.combined.shape[0]

    def solve(self, v, out=None):
        c = self.combined
        v, out = _prepare(v, self.n, c.dtype, out)
        _kernels.ilu0_solve(c.row_ptr, c.col_idx, c.values, self.diag_ptr, v, out)
        return out

    def solve_hermitian(self, v, out=None):
        c = self.combined
        v, out = _prepare(v, self.n, c.dtype, out)
        _kernels.ilu0_solve_hermitian(c.row_ptr, c.col_idx, c.values, self.diag_ptr, v, out)
        return out

    def lu_dense(self):
        """Dense ``(L, U)``; for tests and small problems only."""
        full = self.combined.to_dense()
        L = np.tril(full, -1) + np.eye(self.n, dtype=full.dtype)
        U = np.triu(full)
        return L, U


def ilu0_factorize(A: CsrMatrix) -> Ilu0Factors:
    nrows, ncols = A.shape
    if nrows != ncols:
        raise DimensionMismatch(f"ILU(0) needs a square matrix, got {A.shape}")
    diag_ptr = A.diagonal_positions()
    missing = np.flatnonzero(diag_ptr < 0)
    if missing.size:
        raise MissingDiagonal(int(missing[0]))
    combined = A.copy()
    bad = _kernels.ilu0_factorize(combined.row_ptr, combined.col_idx, combined.values, diag_ptr)
    if bad >= 0:
        raise ZeroPivot(int(bad))
    return Ilu0Factors(combined, diag_ptr)


def apply_m_inverse(P, v, out=None, counter: OpCounter | None = None):
    out = P.solve(v, out)
    if counter is not None:
        counter.precond_applies += 1
    return out


def apply_m_inv_hermitian(P, v, out=None, counter: OpCounter | None = None):
    out = P.solve_hermitian(v, out)
    if counter is not None:
        counter.hermitian_solves += 1
    return out
