"""ML(n)BiCGStabt, ML(n)BiCG and a baseline BiCGStab.

All three solvers share the same conventions:

* stopping rule ``||r_k||_2 / ||b||_2 < tol`` on the recursively computed
  residual, tested right after every update of ``x`` and ``r``;
* ``flag`` is 0 (converged), 1 (iteration budget exhausted) or -1
  (breakdown);
* ``true_err = ||b - A x||_2 / ||b||_2`` is recomputed at exit whatever the
  flag;
* when ``x0`` is omitted or all zeros, ``r0 = b`` is taken without a matvec.
"""
from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels as K
from .precond import IdentityPreconditioner, apply_m_inv_hermitian, apply_m_inverse
from .sparse import (
    CsrMatrix,
    DimensionMismatch,
    OpCounter,
    dot_hermitian,
    matvec,
    matvec_hermitian,
    norm2,
    work_dtype,
)

__all__ = [
    "CONVERGED",
    "MAX_ITER",
    "BREAKDOWN",
    "SolverBreakdown",
    "ZeroDenominator",
    "OmegaBreakdown",
    "SolverConfig",
    "SolverReport",
    "SHADOW_STRATEGIES",
    "make_shadow_matrix",
    "choose_omega",
    "ml_n_bicgstabt",
    "ml_n_bicg",
    "bicgstab",
]

CONVERGED = 0
MAX_ITER = 1
BREAKDOWN = -1


class SolverBreakdown(ArithmeticError):
    pass


class ZeroDenominator(SolverBreakdown):
    pass


class OmegaBreakdown(SolverBreakdown):
    pass


@dataclass(frozen=True)
class SolverConfig:
    n: int = 1
    tol: float = 1e-7
    max_it: int = 1000
    kappa: float = 0.0
    breakdown_eps: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_it < 1:
            raise ValueError(f"max_it must be >= 1, got {self.max_it}")
        if not 0 <= self.kappa < 1:
            raise ValueError(f"kappa must lie in [0, 1), got {self.kappa}")
        if self.breakdown_eps < 0:
            raise ValueError("breakdown_eps must be nonnegative")


@dataclass
class SolverReport:
    flag: int
    iter: int
    err: float
    true_err: float
    residual_history: list[float]
    counters: OpCounter
    elapsed_seconds: float
    omega_history: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.flag == CONVERGED


SHADOW_STRATEGIES = ("residual_gauss", "residual_gauss_complex", "sign_gauss")


def make_shadow_matrix(r0, n: int, strategy: str = "residual_gauss", seed: int = 0) -> np.ndarray:
    """Build the N-by-n shadow matrix ``Q = [r0, random columns]``.

    The random columns are standard Gaussian (``residual_gauss``), complex
    Gaussian ``randn + 1j*randn`` (``residual_gauss_complex``) or the signs of
    Gaussian draws (``sign_gauss``), from a PCG64 stream seeded by ``seed``.
    The result is Fortran-ordered so that each column is contiguous.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    strategy = strategy.replace("-", "_")
    if strategy not in SHADOW_STRATEGIES:
        raise ValueError(f"unknown shadow strategy {strategy!r}")
    r0 = np.asarray(r0)
    N = r0.shape[0]
    rng = np.random.default_rng(seed)
    if strategy == "residual_gauss_complex":
        re = rng.standard_normal((N, n - 1))
        rand = re + 1j * rng.standard_normal((N, n - 1))
    elif strategy == "sign_gauss":
        rand = np.where(rng.standard_normal((N, n - 1)) >= 0, 1.0, -1.0)
    else:
        rand = rng.standard_normal((N, n - 1))
    dtype = work_dtype(r0, rand)
    Q = np.empty((N, n), dtype=dtype, order="F")
    Q[:, 0] = r0
    Q[:, 1:] = rand
    return Q


def choose_omega(Au, u, kappa: float = 0.0, counter: OpCounter | None = None):
    """Minimization step ``omega = (Au)^H u / ||Au||^2`` with safeguard.

    When ``0 < |rho| < kappa``, where ``rho`` is the cosine between ``Au``
    and ``u``, omega is scaled by ``kappa / |rho|``. Returns
    ``(omega, |rho|)``.
    """
    zz = dot_hermitian(Au, Au, counter).real
    if zz == 0:
        raise ZeroDenominator("||A u||_2 = 0 in the minimization step")
    zu = dot_hermitian(Au, u, counter)
    omega = zu / zz
    unrm = norm2(u, counter)
    rho_abs = float(abs(zu) / (np.sqrt(zz) * unrm)) if unrm > 0 else 0.0
    if kappa > 0 and rho_abs < kappa and rho_abs != 0:
        omega = omega * (kappa / rho_abs)
    if omega == 0:
        raise OmegaBreakdown("omega = 0 in the minimization step")
    return omega, rho_abs


def _check_system(A: CsrMatrix, b):
    N, ncols = A.shape
    if N != ncols:
        raise DimensionMismatch(f"A must be square, got {A.shape}")
    b = np.asarray(b)
    if b.shape != (N,):
        raise DimensionMismatch(f"b has shape {b.shape}, expected ({N},)")
    return N, b


def _initial_residual(A, b, x0, N, dtype, counter):
    x = np.zeros(N, dtype=dtype)
    r = np.empty(N, dtype=dtype)
    if x0 is not None:
        x0 = np.asarray(x0)
        if x0.shape != (N,):
            raise DimensionMismatch(f"x0 has shape {x0.shape}, expected ({N},)")
        x[:] = x0
    if x0 is not None and np.any(x0):
        K.residual(A.row_ptr, A.col_idx, A.values, x, b.astype(dtype, copy=False), r)
        counter.matvecs += 1
    else:
        r[:] = b
    return x, r


def _finish(A, b, x, scratch, bnrm2, flag, it, history, counter, t0, omegas):
    # scratch is dead at exit; reuse it for b - A x
    K.residual(A.row_ptr, A.col_idx, A.values, x, b.astype(x.dtype, copy=False), scratch)
    true_err = norm2(scratch) / bnrm2
    return SolverReport(
        flag=flag,
        iter=it,
        err=history[-1],
        true_err=float(true_err),
        residual_history=history,
        counters=counter,
        elapsed_seconds=time.perf_counter() - t0,
        omega_history=omegas,
    )


def _prepare_shadow(Q, N, n, dtype):
    Q = np.asarray(Q)
    if Q.ndim == 1:
        Q = Q[:, None]
    if Q.shape != (N, n):
        raise DimensionMismatch(f"shadow matrix has shape {Q.shape}, expected ({N}, {n})")
    return np.asfortranarray(Q, dtype=dtype)


def ml_n_bicgstabt(A: CsrMatrix, b, x0=None, Q=None, M=None,
                   config: SolverConfig | None = None,
                   callback: Callable | None = None):
    """Preconditioned ML(n)BiCGStab with A-transpose.

    Parameters
    ----------
    A : CsrMatrix
        Square system matrix.
    b : ndarray
        Right-hand side.
    x0 : ndarray, optional
        Initial guess, zeros by default.
    Q : ndarray, optional
        N-by-n shadow matrix. Defaults to
        ``make_shadow_matrix(r0, n, "residual_gauss", config.seed)``.
    M : preconditioner, optional
        Object with ``solve`` / ``solve_hermitian``; identity by default, which
        gives the unpreconditioned algorithm.
    config : SolverConfig, optional
        Block size ``n``, tolerance, budget and omega safeguard ``kappa``.
    callback : callable, optional
        Called as ``callback(k, x, err)`` after every completed iteration.

    Returns
    -------
    x : ndarray
    report : SolverReport

    Notes
    -----
    The workspace is ``x, r, ghat, z`` plus the blocks ``G, W`` (N-by-n) and
    ``F`` (N-by-(n-1)). ``r`` doubles as ``u`` during the minimization step,
    ``ghat`` as ``M^{-1} u``, and ``z`` holds ``A M^{-1} u`` and then the
    ``z_w`` sweep vector. Columns of ``G``, ``W`` and ``c`` are indexed by
    the position inside the current cycle and overwritten once per cycle.
    """
    cfg = config or SolverConfig()
    N, b = _check_system(A, b)
    n, tol, eps = cfg.n, cfg.tol, cfg.breakdown_eps
    if M is None:
        M = IdentityPreconditioner(N)
    dtype = work_dtype(A.values, b, x0 if x0 is not None else (), Q if Q is not None else ())
    counter = OpCounter()
    t0 = time.perf_counter()

    x, r = _initial_residual(A, b, x0, N, dtype, counter)
    bnrm2 = norm2(b) or 1.0
    err = norm2(r, counter) / bnrm2
    history = [err]
    omegas = []
    ghat = np.empty(N, dtype=dtype)
    z = np.empty(N, dtype=dtype)

    def done(flag, it):
        return x, _finish(A, b, x, z, bnrm2, flag, it, history, counter, t0, omegas)

    if err < tol:
        return done(CONVERGED, 0)

    if Q is None:
        Q = make_shadow_matrix(r, n, "residual_gauss", cfg.seed)
    Q = _prepare_shadow(Q, N, n, dtype)
    G = np.empty((N, n), dtype=dtype, order="F")
    W = np.empty((N, n), dtype=dtype, order="F")
    F = np.empty((N, n - 1), dtype=dtype, order="F")
    c = np.zeros(n, dtype=dtype)

    def broke(value):
        return not np.isfinite(value) or abs(value) <= eps

    # setup: F = M^{-H} A^H Q[:, :n-1], first direction
    for s in range(n - 1):
        matvec_hermitian(A, Q[:, s], out=z, counter=counter)
        apply_m_inv_hermitian(M, z, out=F[:, s], counter=counter)
    G[:, 0] = r
    apply_m_inverse(M, r, out=ghat, counter=counter)
    matvec(A, ghat, out=W[:, 0], counter=counter)
    c[0] = dot_hermitian(Q[:, 0], W[:, 0], counter)
    if broke(c[0]):
        return done(BREAKDOWN, 0)
    e = dot_hermitian(Q[:, 0], r, counter)

    it = 0
    omega = None
    j = 0
    while True:
        for i in range(1, n):
            if it >= cfg.max_it:
                return done(MAX_ITER, it)
            alpha = e / c[i - 1]
            K.axpy(alpha, ghat, x)
            K.axpy(-alpha, W[:, i - 1], r)
            counter.saxpys += 2
            it += 1
            err = norm2(r, counter) / bnrm2
            history.append(err)
            if callback is not None:
                callback(it, x, err)
            if err < tol:
                return done(CONVERGED, it)
            if not np.isfinite(err):
                return done(BREAKDOWN, it)

            e = dot_hermitian(Q[:, i], r, counter)
            gi = G[:, i]
            if j >= 1:
                beta = -e / c[i]
                K.waxpy(r, beta, W[:, i], z)
                K.scal(beta, gi)
                counter.saxpys += 1
                counter.scales += 1
                for s in range(i + 1, n):
                    beta = -dot_hermitian(Q[:, s], z, counter) / c[s]
                    K.axpy(beta, W[:, s], z)
                    K.axpy(beta, G[:, s], gi)
                    counter.saxpys += 2
                K.xpay(z, -1.0 / omega, gi)
                counter.saxpys += 1
                for s in range(i):
                    beta = -dot_hermitian(F[:, s], gi, counter) / c[s]
                    K.axpy(beta, G[:, s], gi)
                    counter.saxpys += 1
            else:
                beta = -dot_hermitian(F[:, 0], r, counter) / c[0]
                K.waxpy(r, beta, G[:, 0], gi)
                counter.saxpys += 1
                for s in range(1, i):
                    beta = -dot_hermitian(F[:, s], gi, counter) / c[s]
                    K.axpy(beta, G[:, s], gi)
                    counter.saxpys += 1
            apply_m_inverse(M, gi, out=ghat, counter=counter)
            matvec(A, ghat, out=W[:, i], counter=counter)
            c[i] = dot_hermitian(Q[:, i], W[:, i], counter)
            if broke(c[i]):
                return done(BREAKDOWN, it)

        # last position of the cycle: minimization step
        if it >= cfg.max_it:
            return done(MAX_ITER, it)
        alpha = e / c[n - 1]
        K.axpy(alpha, ghat, x)
        K.axpy(-alpha, W[:, n - 1], r)  # r now holds u
        counter.saxpys += 2
        err = norm2(r, counter) / bnrm2
        if err < tol:
            it += 1
            history.append(err)
            if callback is not None:
                callback(it, x, err)
            return done(CONVERGED, it)
        apply_m_inverse(M, r, out=ghat, counter=counter)
        matvec(A, ghat, out=z, counter=counter)
        try:
            omega, _ = choose_omega(z, r, cfg.kappa, counter)
        except SolverBreakdown:
            return done(BREAKDOWN, it)
        omegas.append(omega)
        K.axpy(omega, ghat, x)
        K.axpy(-omega, z, r)
        counter.saxpys += 2
        it += 1
        err = norm2(r, counter) / bnrm2
        history.append(err)
        if callback is not None:
            callback(it, x, err)
        if err < tol:
            return done(CONVERGED, it)
        if not np.isfinite(err):
            return done(BREAKDOWN, it)

        e = dot_hermitian(Q[:, 0], r, counter)
        beta = -e / c[0]
        g0 = G[:, 0]
        K.waxpy(r, beta, W[:, 0], z)
        K.scal(beta, g0)
        counter.saxpys += 1
        counter.scales += 1
        for s in range(1, n):
            beta = -dot_hermitian(Q[:, s], z, counter) / c[s]
            K.axpy(beta, W[:, s], z)
            K.axpy(beta, G[:, s], g0)
            counter.saxpys += 2
        K.xpay(z, -1.0 / omega, g0)
        counter.saxpys += 1
        apply_m_inverse(M, g0, out=ghat, counter=counter)
        matvec(A, ghat, out=W[:, 0], counter=counter)
        c[0] = dot_hermitian(Q[:, 0], W[:, 0], counter)
        if broke(c[0]):
            return done(BREAKDOWN, it)
        j += 1


def bicgstab(A: CsrMatrix, b, x0=None, M=None, config: SolverConfig | None = None,
             callback: Callable | None = None, shadow=None):
    """Right-preconditioned BiCGStab with the shadow residual ``r0``.

    Uses the same stopping rule, flags and counters as :func:`ml_n_bicgstabt`;
    ``config.n`` is ignored. ``shadow`` overrides the shadow vector.
    """
    cfg = config or SolverConfig()
    N, b = _check_system(A, b)
    tol, eps = cfg.tol, cfg.breakdown_eps
    if M is None:
        M = IdentityPreconditioner(N)
    dtype = work_dtype(A.values, b, x0 if x0 is not None else (),
                       shadow if shadow is not None else ())
    counter = OpCounter()
    t0 = time.perf_counter()

    x, r = _initial_residual(A, b, x0, N, dtype, counter)
    bnrm2 = norm2(b) or 1.0
    err = norm2(r, counter) / bnrm2
    history = [err]
    omegas = []
    t = np.empty(N, dtype=dtype)

    def done(flag, it):
        return x, _finish(A, b, x, t, bnrm2, flag, it, history, counter, t0, omegas)

    if err < tol:
        return done(CONVERGED, 0)

    rhat = r.copy() if shadow is None else np.array(shadow, dtype=dtype)
    p = np.empty(N, dtype=dtype)
    v = np.empty(N, dtype=dtype)
    phat = np.empty(N, dtype=dtype)
    rho_old = alpha = omega = None
    it = 0
    while True:
        if it >= cfg.max_it:
            return done(MAX_ITER, it)
        rho = dot_hermitian(rhat, r, counter)
        if not np.isfinite(rho) or abs(rho) <= eps:
            return done(BREAKDOWN, it)
        if rho_old is None:
            p[:] = r
        else:
            beta = (rho / rho_old) * (alpha / omega)
            K.axpy(-omega, v, p)
            K.xpay(r, beta, p)
            counter.saxpys += 2
        apply_m_inverse(M, p, out=phat, counter=counter)
        matvec(A, phat, out=v, counter=counter)
        denom = dot_hermitian(rhat, v, counter)
        if not np.isfinite(denom) or abs(denom) <= eps:
            return done(BREAKDOWN, it)
        alpha = rho / denom
        K.axpy(alpha, phat, x)
        K.axpy(-alpha, v, r)  # r now holds s
        counter.saxpys += 2
        err = norm2(r, counter) / bnrm2
        if err < tol:
            it += 1
            history.append(err)
            if callback is not None:
                callback(it, x, err)
            return done(CONVERGED, it)
        apply_m_inverse(M, r, out=phat, counter=counter)
        matvec(A, phat, out=t, counter=counter)
        try:
            omega, _ = choose_omega(t, r, cfg.kappa, counter)
        except SolverBreakdown:
            return done(BREAKDOWN, it)
        omegas.append(omega)
        K.axpy(omega, phat, x)
        K.axpy(-omega, t, r)
        counter.saxpys += 2
        it += 1
        err = norm2(r, counter) / bnrm2
        history.append(err)
        if callback is not None:
            callback(it, x, err)
        if err < tol:
            return done(CONVERGED, it)
        if not np.isfinite(err):
            return done(BREAKDOWN, it)
        rho_old = rho


def ml_n_bicg(A: CsrMatrix, b, x0=None, Q=None, config: SolverConfig | None = None,
              callback: Callable | None = None):
    """ML(n)BiCG, the progenitor of ML(n)BiCGStab.

    Shadow vectors ``p_k = (A^H)^{g_n(k)} q_{r_n(k)}``. ``Q`` is either an
    N-by-n array or a callable ``Q(k, r_prev)`` returning ``q_k`` for
    ``k = 1..n``; the callable form lets ``q_k`` depend on the residual
    ``r_{k-1}``, as needed for the FOM and GMRES special cases.

    Repeated multiplication by ``A^H`` makes this numerically fragile; it is a
    reference path, not a production solver.
    """
    cfg = config or SolverConfig()
    N, b = _check_system(A, b)
    n, tol, eps = cfg.n, cfg.tol, cfg.breakdown_eps
    dtype = work_dtype(A.values, b, x0 if x0 is not None else (),
                       Q if (Q is not None and not callable(Q)) else ())
    counter = OpCounter()
    t0 = time.perf_counter()

    x, r = _initial_residual(A, b, x0, N, dtype, counter)
    bnrm2 = norm2(b) or 1.0
    err = norm2(r, counter) / bnrm2
    history = [err]
    scratch = np.empty(N, dtype=dtype)

    def done(flag, it):
        return x, _finish(A, b, x, scratch, bnrm2, flag, it, history, counter, t0, [])

    if err < tol:
        return done(CONVERGED, 0)

    if Q is None:
        Q = make_shadow_matrix(r, n, "residual_gauss", cfg.seed)
    if callable(Q):
        shadow = Q
    else:
        Qa = _prepare_shadow(Q, N, n, dtype)

        def shadow(k, r_prev):
            return Qa[:, k - 1]

    # P[:, (k-1) % n] holds p_k for the n most recent shadow indices
    P = np.empty((N, n), dtype=dtype, order="F")
    P[:, 0] = shadow(1, r)
    g = r.copy()
    Ag = matvec(A, g, counter=counter)
    d = dot_hermitian(P[:, 0], Ag, counter)
    window = deque([(g, Ag, d)], maxlen=n)  # (g_s, A g_s, p_{s+1}^H A g_s)
    if not np.isfinite(d) or abs(d) <= eps:
        return done(BREAKDOWN, 0)

    it = 0
    while True:
        if it >= cfg.max_it:
            return done(MAX_ITER, it)
        k = it + 1
        g_prev, Ag_prev, d_prev = window[-1]
        alpha = dot_hermitian(P[:, (k - 1) % n], r, counter) / d_prev
        K.axpy(alpha, g_prev, x)
        K.axpy(-alpha, Ag_prev, r)
        counter.saxpys += 2
        it = k
        err = norm2(r, counter) / bnrm2
        history.append(err)
        if callback is not None:
            callback(it, x, err)
        if err < tol:
            return done(CONVERGED, it)
        if not np.isfinite(err):
            return done(BREAKDOWN, it)

        # window holds s = max(k - n, 0) .. k - 1 in increasing order
        gk = r.copy()
        Agk = matvec(A, r, counter=counter)
        s0 = max(k - n, 0)
        for offset, (gs, Ags, ds) in enumerate(window):
            s = s0 + offset
            beta = -dot_hermitian(P[:, s % n], Agk, counter) / ds
            K.axpy(beta, gs, gk)
            K.axpy(beta, Ags, Agk)
            counter.saxpys += 2

        # p_{k+1}: new shadow vector inside the first cycle, else one more A^H
        col = k % n
        if k + 1 <= n:
            P[:, col] = shadow(k + 1, r)
        else:
            matvec_hermitian(A, P[:, col], out=scratch, counter=counter)
            P[:, col] = scratch
        dk = dot_hermitian(P[:, col], Agk, counter)
        if not np.isfinite(dk) or abs(dk) <= eps:
            return done(BREAKDOWN, it)
        window.append((gk, Agk, dk))
