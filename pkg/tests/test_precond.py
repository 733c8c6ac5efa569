import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mlnsolve.precond import (
    IdentityPreconditioner,
    MissingDiagonal,
    ZeroPivot,
    apply_m_inv_hermitian,
    apply_m_inverse,
    ilu0_factorize,
)
from mlnsolve.sparse import CsrMatrix, OpCounter, dot_hermitian, matvec

from systems import diag_dominant, random_pattern_matrix


def dense_lu_nopivot(D):
    """Doolittle elimination without pivoting."""
    N = D.shape[0]
    U = D.astype(np.result_type(D, np.float64)).copy()
    L = np.eye(N, dtype=U.dtype)
    for k in range(N):
        for i in range(k + 1, N):
            L[i, k] = U[i, k] / U[k, k]
            U[i, k:] -= L[i, k] * U[k, k:]
    return L, U


def test_diagonal():
    M = ilu0_factorize(CsrMatrix.from_dense(np.diag([2.0, 3.0, 4.0])))
    L, U = M.lu_dense()
    np.testing.assert_array_equal(L, np.eye(3))
    np.testing.assert_array_equal(U, np.diag([2.0, 3.0, 4.0]))


def test_unit_lower_triangular():
    D = np.array([[1.0, 0, 0], [2.0, 1.0, 0], [0.5, -3.0, 1.0]])
    L, U = ilu0_factorize(CsrMatrix.from_dense(D)).lu_dense()
    np.testing.assert_allclose(L, D, rtol=1e-15)
    np.testing.assert_allclose(U, np.eye(3), atol=1e-15)


@pytest.mark.parametrize("complex_", [False, True])
@pytest.mark.parametrize("N", [4, 5])
def test_dense_pattern_equals_dense_lu(N, complex_):
    rng = np.random.default_rng(N)
    D = rng.standard_normal((N, N)) + (1j * rng.standard_normal((N, N)) if complex_ else 0)
    D += np.diag(np.abs(D).sum(axis=1))
    L, U = ilu0_factorize(CsrMatrix.from_dense(D)).lu_dense()
    Lr, Ur = dense_lu_nopivot(D)
    np.testing.assert_allclose(L, Lr, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(U, Ur, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_pattern_identity_and_zero_fill(seed):
    A, D = random_pattern_matrix(30, seed)
    M = ilu0_factorize(A)
    assert M.combined.same_structure(A)
    L, U = M.lu_dense()
    on = D != 0
    assert np.abs((L @ U - D)[on]).max() <= 1e-12 * np.abs(D).max()
    assert np.all(L[~on & ~np.eye(30, dtype=bool)] == 0)
    assert np.all(U[~on] == 0)
    assert np.all(np.diag(U) != 0)


def test_factorization_leaves_input_untouched():
    A, D = random_pattern_matrix(10, 3)
    ilu0_factorize(A)
    np.testing.assert_array_equal(A.to_dense(), D)


def test_apply_examples():
    v = np.array([2.0, 4.0])
    np.testing.assert_array_equal(IdentityPreconditioner(2).solve(v), v)
    np.testing.assert_array_equal(IdentityPreconditioner(2).solve_hermitian(v), v)
    M = ilu0_factorize(CsrMatrix.from_dense(np.diag([2.0, 4.0])))
    np.testing.assert_allclose(M.solve(v), [1, 1])
    np.testing.assert_allclose(M.solve_hermitian(v), [1, 1])


def test_apply_dense_oracle():
    rng = np.random.default_rng(5)
    D = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    D += 6 * np.eye(5)
    M = ilu0_factorize(CsrMatrix.from_dense(D))
    L, U = M.lu_dense()
    Mdense = L @ U
    v = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    np.testing.assert_allclose(M.solve(v), np.linalg.solve(Mdense, v), rtol=1e-12)
    np.testing.assert_allclose(M.solve_hermitian(v), np.linalg.solve(Mdense.conj().T, v), rtol=1e-12)


def test_counters_and_out_buffers():
    M = ilu0_factorize(CsrMatrix.from_dense(np.diag([2.0, 4.0])))
    c = OpCounter()
    out = np.empty(2)
    assert apply_m_inverse(M, [2.0, 4.0], out=out, counter=c) is out
    apply_m_inv_hermitian(M, [2.0, 4.0], counter=c)
    apply_m_inverse(IdentityPreconditioner(2), [1.0, 1.0], counter=c)
    assert c.precond_applies == 2
    assert c.hermitian_solves == 1


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 40), st.integers(0, 2**32 - 1), st.booleans())
def test_adjoint_identity(N, seed, complex_):
    A, _ = random_pattern_matrix(N, seed, complex_=complex_)
    M = ilu0_factorize(A)
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(N) + (1j * rng.standard_normal(N) if complex_ else 0)
    v = rng.standard_normal(N) + (1j * rng.standard_normal(N) if complex_ else 0)
    lhs = dot_hermitian(M.solve_hermitian(u), v)
    rhs = dot_hermitian(u, M.solve(v))
    scale = np.linalg.norm(M.solve_hermitian(u)) * np.linalg.norm(v)
    assert abs(lhs - rhs) <= 1e-12 * scale


@pytest.mark.parametrize("N", [10, 100])
def test_solve_inverts_no_fill_pattern(N):
    # tridiagonal: ILU(0) produces no dropped fill, so M = A
    rng = np.random.default_rng(N)
    off = rng.standard_normal((2, N - 1))
    D = np.diag(off[0], -1) + np.diag(off[1], 1)
    D += np.diag(np.abs(D).sum(axis=1) + 1.0)
    A = CsrMatrix.from_dense(D)
    M = ilu0_factorize(A)
    v = rng.standard_normal(N)
    assert np.linalg.norm(M.solve(matvec(A, v)) - v) <= 1e-6 * np.linalg.norm(v)


@pytest.mark.parametrize("seed", range(5))
def test_solve_approximates_inverse(seed):
    A, _ = diag_dominant(100, seed, density=0.03, margin=5.0)
    M = ilu0_factorize(A)
    v = np.random.default_rng(seed).standard_normal(100)
    w = M.solve(matvec(A, v))
    assert np.linalg.norm(w - v) <= 0.1 * np.linalg.norm(v)


def test_missing_diagonal():
    A = CsrMatrix.from_dense(np.array([[1.0, 2.0], [3.0, 0.0]]))
    with pytest.raises(MissingDiagonal) as info:
        ilu0_factorize(A)
    assert info.value.row == 1


def test_zero_pivot():
    A = CsrMatrix.from_dense(np.array([[1.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(ZeroPivot) as info:
        ilu0_factorize(A)
    assert info.value.row == 1
