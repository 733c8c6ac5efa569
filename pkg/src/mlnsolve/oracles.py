"""Dense reference implementations used to check the sparse solvers.

Nothing here touches the CSR kernels: every oracle takes a dense matrix
(use ``CsrMatrix.to_dense()``) so that agreement is an independent check.
"""
from __future__ import annotations

import numpy as np

from .index_map import g_index, r_index

__all__ = [
    "SingularMatrix",
    "PivotBreakdown",
    "dense_direct_solve",
    "arnoldi",
    "fom_reference",
    "gmres_reference",
    "bicg_reference",
    "cg_reference",
    "mlbicgstabt_literal",
]


class SingularMatrix(np.linalg.LinAlgError):
    pass


class PivotBreakdown(ArithmeticError):
    pass


def dense_direct_solve(A, b):
    """Gaussian elimination with partial pivoting (LAPACK ``gesv``)."""
    A = np.asarray(A)
    b = np.asarray(b)
    try:
        return np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(str(exc)) from None


def arnoldi(A, r0, m):
    """Modified Gram-Schmidt Arnoldi.

    Returns ``(V, H, k)`` where ``V`` is N-by-(k+1), ``H`` is (k+1)-by-k and
    ``k <= m`` is the number of completed steps; ``k < m`` signals a lucky
    breakdown (the Krylov space became invariant at step ``k``).
    """
    A = np.asarray(A)
    N = A.shape[0]
    dtype = np.result_type(A, r0, np.float64)
    V = np.zeros((N, m + 1), dtype=dtype)
    H = np.zeros((m + 1, m), dtype=dtype)
    beta = np.linalg.norm(r0)
    V[:, 0] = r0 / beta
    for j in range(m):
        w = A @ V[:, j]
        wnorm = np.linalg.norm(w)
        for i in range(j + 1):
            H[i, j] = np.vdot(V[:, i], w)
            w = w - H[i, j] * V[:, i]
        H[j + 1, j] = np.linalg.norm(w)
        if H[j + 1, j] <= 1e-12 * wnorm:
            H[j + 1, j] = 0
            return V[:, : j + 2], H[: j + 2, : j + 1], j + 1
        V[:, j + 1] = w / H[j + 1, j]
    return V, H, m


def _krylov_residuals(A, b, x0, steps, minimize):
    A = np.asarray(A)
    b = np.asarray(b)
    x0 = np.zeros_like(b) if x0 is None else np.asarray(x0)
    r0 = b - A @ x0
    beta = np.linalg.norm(r0)
    out = [float(beta)]
    if beta == 0:
        return out
    V, H, k = arnoldi(A, r0, steps)
    for m in range(1, k + 1):
        rhs = np.zeros(m + 1, dtype=H.dtype)
        rhs[0] = beta
        if minimize:
            y = np.linalg.lstsq(H[: m + 1, :m], rhs, rcond=None)[0]
        else:
            y = np.linalg.solve(H[:m, :m], rhs[:m])
        xm = x0 + V[:, :m] @ y
        out.append(float(np.linalg.norm(b - A @ xm)))
    return out


def fom_reference(A, b, x0=None, steps=None):
    """Residual norms ``[||r0||, ||r1||, ...]`` of the full orthogonalization method.

    The list stops early at a lucky breakdown, where the last entry is the
    (numerically zero) residual of the exact solution.
    """
    steps = np.asarray(A).shape[0] if steps is None else steps
    return _krylov_residuals(A, b, x0, steps, minimize=False)


def gmres_reference(A, b, x0=None, steps=None):
    """Residual norms of unrestarted GMRES, same layout as :func:`fom_reference`."""
    steps = np.asarray(A).shape[0] if steps is None else steps
    return _krylov_residuals(A, b, x0, steps, minimize=True)


def bicg_reference(A, b, x0=None, shadow_r0=None, steps=None, return_iterates=False):
    """Textbook BiCG; returns the residual norms ``[||r0||, ||r1||, ...]``.

    Stops early once the residual is exactly zero. With
    ``return_iterates=True`` the iterates ``[x0, x1, ...]`` are returned too.
    """
    A = np.asarray(A)
    b = np.asarray(b)
    N = A.shape[0]
    steps = N if steps is None else steps
    dtype = np.result_type(A, b, np.float64)
    x = np.zeros(N, dtype=dtype) if x0 is None else np.array(x0, dtype=dtype)
    r = b - A @ x
    rt = r.copy() if shadow_r0 is None else np.array(shadow_r0, dtype=dtype)
    p, pt = r.copy(), rt.copy()
    rho = np.vdot(rt, r)
    norms, xs = [float(np.linalg.norm(r))], [x.copy()]
    AH = A.conj().T
    for _ in range(steps):
        if norms[-1] == 0:
            break
        v = A @ p
        sigma = np.vdot(pt, v)
        if sigma == 0 or rho == 0:
            raise PivotBreakdown("zero inner product in BiCG")
        alpha = rho / sigma
        x = x + alpha * p
        r = r - alpha * v
        rt = rt - np.conj(alpha) * (AH @ pt)
        rho_new = np.vdot(rt, r)
        beta = rho_new / rho
        p = r + beta * p
        pt = rt + np.conj(beta) * pt
        rho = rho_new
        norms.append(float(np.linalg.norm(r)))
        xs.append(x.copy())
    return (norms, xs) if return_iterates else norms


def cg_reference(A, b, x0=None, steps=None):
    """Conjugate gradients for Hermitian positive definite ``A``."""
    A = np.asarray(A)
    b = np.asarray(b)
    N = A.shape[0]
    steps = N if steps is None else steps
    x = np.zeros(N, dtype=np.result_type(A, b, np.float64)) if x0 is None else np.array(x0)
    r = b - A @ x
    p = r.copy()
    rr = np.vdot(r, r).real
    norms = [float(np.sqrt(rr))]
    for _ in range(steps):
        if rr == 0:
            break
        v = A @ p
        alpha = rr / np.vdot(p, v)
        x = x + alpha * p
        r = r - alpha * v
        rr_new = np.vdot(r, r).real
        p = r + (rr_new / rr) * p
        rr = rr_new
        norms.append(float(np.sqrt(rr)))
    return norms


def mlbicgstabt_literal(A, b, Q, steps, x0=None):
    """Unpreconditioned ML(n)BiCGStabt written with the global index ``k``.

    Keeps every ``g_k``, ``w_k``, ``c_k`` and ``omega_j`` and schedules the
    sweeps through ``g_index``/``r_index``; it is a transcription for
    cross-checking, not an efficient solver. Runs exactly ``steps``
    iterations and returns ``(xs, rs)``, the iterates and residuals for
    ``k = 0..steps``.
    """
    A = np.asarray(A)
    b = np.asarray(b)
    Q = np.asarray(Q)
    if Q.ndim == 1:
        Q = Q[:, None]
    N, n = Q.shape
    dtype = np.result_type(A, b, Q, np.float64)
    x = np.zeros(N, dtype=dtype) if x0 is None else np.array(x0, dtype=dtype)

    def q(i):
        return Q[:, i - 1]

    AH = A.conj().T
    f = {i: AH @ q(i) for i in range(1, n)}
    r = b - A @ x
    g = {0: r.copy()}
    w = {0: A @ g[0]}
    c = {0: np.vdot(q(1), w[0])}
    omega = {}
    xs, rs = [x.copy()], [r.copy()]

    for k in range(1, steps + 1):
        jk = g_index(n, k)
        alpha = np.vdot(q(r_index(n, k)), r) / c[k - 1]
        if r_index(n, k) < n:
            x = x + alpha * g[k - 1]
            r = r - alpha * w[k - 1]
            zw = r.copy()
            gk = np.zeros(N, dtype=dtype)
            for s in range(max(k - n, 0), jk * n):
                bt = -np.vdot(q(r_index(n, s + 1)), zw) / c[s]
                zw = zw + bt * w[s]
                gk = gk + bt * g[s]
            # during the first cycle gk is still zero and no omega exists yet
            gk = zw - gk / omega[g_index(n, k + 1)] if jk >= 1 else zw
            for s in range(jk * n, k):
                bs = -np.vdot(f[r_index(n, s + 1)], gk) / c[s]
                gk = gk + bs * g[s]
        else:
            x = x + alpha * g[k - 1]
            u = r - alpha * w[k - 1]
            Au = A @ u
            om = np.vdot(Au, u) / np.vdot(Au, Au).real
            omega[g_index(n, k + 1)] = om
            x = x + om * u
            r = -om * Au + u
            zw = r.copy()
            gk = np.zeros(N, dtype=dtype)
            for s in range(jk * n, k):
                bt = -np.vdot(q(r_index(n, s + 1)), zw) / c[s]
                zw = zw + bt * w[s]
                gk = gk + bt * g[s]
            gk = zw - gk / om
        g[k] = gk
        w[k] = A @ gk
        c[k] = np.vdot(q(r_index(n, k + 1)), w[k])
        xs.append(x.copy())
        rs.append(r.copy())
    return xs, rs
