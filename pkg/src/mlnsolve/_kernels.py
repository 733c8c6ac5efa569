"""Compiled CSR kernels.

All kernels write into caller-supplied output buffers so the solvers can run
without allocating length-N temporaries inside the iteration.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def csr_matvec(row_ptr, col_idx, values, v, out):
    for i in range(row_ptr.size - 1):
        acc = out.dtype.type(0)
        for p in range(row_ptr[i], row_ptr[i + 1]):
            acc += values[p] * v[col_idx[p]]
        out[i] = acc


@njit(cache=True)
def csr_rmatvec_conj(row_ptr, col_idx, values, v, out):
    # out = A^H v, scattering row i of A into the columns of A^H
    out[:] = 0
    for i in range(row_ptr.size - 1):
        vi = v[i]
        for p in range(row_ptr[i], row_ptr[i + 1]):
            out[col_idx[p]] += np.conj(values[p]) * vi


@njit(cache=True)
def axpy(a, x, y):
    # y <- y + a x
    for i in range(y.size):
        y[i] += a * x[i]


@njit(cache=True)
def waxpy(x, a, y, out):
    # out <- x + a y
    for i in range(out.size):
        out[i] = x[i] + a * y[i]


@njit(cache=True)
def xpay(x, a, y):
    # y <- x + a y
    for i in range(y.size):
        y[i] = x[i] + a * y[i]


@njit(cache=True)
def scal(a, y):
    for i in range(y.size):
        y[i] *= a


@njit(cache=True)
def residual(row_ptr, col_idx, values, x, b, out):
    # out <- b - A x
    for i in range(row_ptr.size - 1):
        acc = out.dtype.type(0)
        for p in range(row_ptr[i], row_ptr[i + 1]):
            acc += values[p] * x[col_idx[p]]
        out[i] = b[i] - acc


@njit(cache=True)
def ilu0_factorize(row_ptr, col_idx, values, diag_ptr):
    """In-place IKJ ILU(0) on a copy of A's values.

    Returns -1 on success, otherwise the row whose pivot vanished.
    """
    n = row_ptr.size - 1
    marker = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        start, end = row_ptr[i], row_ptr[i + 1]
        for p in range(start, end):
            marker[col_idx[p]] = p
        for p in range(start, diag_ptr[i]):
            k = col_idx[p]
            pivot = values[diag_ptr[k]]
            lik = values[p] / pivot
            values[p] = lik
            for q in range(diag_ptr[k] + 1, row_ptr[k + 1]):
                pos = marker[col_idx[q]]
                if pos >= 0:
                    values[pos] -= lik * values[q]
        for p in range(start, end):
            marker[col_idx[p]] = -1
        if values[diag_ptr[i]] == 0:
            return i
    return -1


@njit(cache=True)
def ilu0_solve(row_ptr, col_idx, values, diag_ptr, v, out):
    # out <- U^{-1} L^{-1} v, L unit lower
    n = row_ptr.size - 1
    for i in range(n):
        acc = v[i]
        for p in range(row_ptr[i], diag_ptr[i]):
            acc -= values[p] * out[col_idx[p]]
        out[i] = acc
    for i in range(n - 1, -1, -1):
        acc = out[i]
        for p in range(diag_ptr[i] + 1, row_ptr[i + 1]):
            acc -= values[p] * out[col_idx[p]]
        out[i] = acc / values[diag_ptr[i]]


@njit(cache=True)
def ilu0_solve_hermitian(row_ptr, col_idx, values, diag_ptr, v, out):
    # out <- L^{-H} U^{-H} v, column sweeps over the CSR rows of U and L
    n = row_ptr.size - 1
    for i in range(n):
        out[i] = v[i]
    for i in range(n):
        yi = out[i] / np.conj(values[diag_ptr[i]])
        out[i] = yi
        for p in range(diag_ptr[i] + 1, row_ptr[i + 1]):
            out[col_idx[p]] -= np.conj(values[p]) * yi
    for i in range(n - 1, -1, -1):
        zi = out[i]
        for p in range(row_ptr[i], diag_ptr[i]):
            out[col_idx[p]] -= np.conj(values[p]) * zi
