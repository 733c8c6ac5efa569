import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mlnsolve.sparse import (
    CsrMatrix,
    DimensionMismatch,
    OpCounter,
    dot_hermitian,
    matvec,
    matvec_hermitian,
    norm2,
    work_dtype,
)


def random_csr(N, M, seed, density=0.4, complex_=False):
    rng = np.random.default_rng(seed)
    D = np.where(rng.random((N, M)) < density, rng.standard_normal((N, M)), 0.0)
    if complex_:
        D = D + 1j * np.where(D != 0, rng.standard_normal((N, M)), 0.0)
    return CsrMatrix.from_dense(D), D


def dense_rows_oracle(D, v):
    return np.array([sum(D[i, j] * v[j] for j in range(D.shape[1])) for i in range(D.shape[0])])


def test_matvec_identity():
    I3 = CsrMatrix.identity(3)
    np.testing.assert_array_equal(matvec(I3, [1.0, 2.0, 3.0]), [1, 2, 3])


def test_matvec_zero():
    Z = CsrMatrix.from_dense(np.zeros((3, 3)))
    assert Z.nnz == 0
    np.testing.assert_array_equal(matvec(Z, [4.0, 5.0, 6.0]), np.zeros(3))


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("complex_", [False, True])
def test_matvec_random(seed, complex_):
    A, D = random_csr(5, 5, seed, complex_=complex_)
    v = np.random.default_rng(seed + 1).standard_normal(5)
    np.testing.assert_allclose(matvec(A, v), dense_rows_oracle(D, v), rtol=1e-14, atol=1e-14)


def test_matvec_rectangular_and_counter():
    A, D = random_csr(4, 7, 3)
    v = np.arange(7.0)
    c = OpCounter()
    out = np.empty(4)
    res = matvec(A, v, out=out, counter=c)
    assert res is out
    np.testing.assert_allclose(out, D @ v, rtol=1e-14)
    assert c.matvecs == 1
    matvec_hermitian(A, np.ones(4), counter=c)
    assert c.hermitian_matvecs == 1


def test_matvec_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        matvec(CsrMatrix.identity(3), np.ones(4))
    with pytest.raises(DimensionMismatch):
        matvec_hermitian(CsrMatrix.identity(3), np.ones(2))


def test_hermitian_symmetric_equals_matvec():
    rng = np.random.default_rng(0)
    B = rng.standard_normal((6, 6))
    A = CsrMatrix.from_dense(B + B.T)
    v = rng.standard_normal(6)
    np.testing.assert_allclose(matvec_hermitian(A, v), matvec(A, v), rtol=1e-14)


def test_hermitian_nilpotent_shift():
    A = CsrMatrix.from_dense(np.array([[0.0, 1.0], [0.0, 0.0]]))
    np.testing.assert_array_equal(matvec_hermitian(A, [1.0, 0.0]), [0.0, 1.0])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 50), st.integers(0, 2**32 - 1))
def test_hermitian_matches_dense(N, seed):
    A, D = random_csr(N, N, seed, complex_=True)
    v = np.random.default_rng(seed).standard_normal(N) + 1j
    ref = D.conj().T @ v
    got = matvec_hermitian(A, v)
    scale = max(np.linalg.norm(ref), 1.0)
    assert np.linalg.norm(got - ref) <= 1e-14 * scale * np.sqrt(N)


def test_real_matrix_complex_vector_promotes():
    A, D = random_csr(4, 4, 9)
    v = np.array([1j, 2, -1j, 0.5])
    out = matvec(A, v)
    assert out.dtype == np.complex128
    np.testing.assert_allclose(out, D @ v, rtol=1e-14)


def test_dot_examples():
    e1, e2 = np.eye(3)[0], np.eye(3)[1]
    assert dot_hermitian(e1, e2) == 0
    assert dot_hermitian(np.array([1j]), np.array([1j])) == 1


def test_dot_conjugates_first_argument():
    assert dot_hermitian(np.array([1j]), np.array([1.0])) == -1j


complex_vec = st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False), min_size=8, max_size=8)


@given(complex_vec, complex_vec)
def test_dot_hermitian_symmetry(u, v):
    u, v = np.array(u), np.array(v)
    np.testing.assert_allclose(dot_hermitian(u, v), np.conj(dot_hermitian(v, u)), rtol=1e-14, atol=1e-14)


def test_dot_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        dot_hermitian(np.ones(2), np.ones(3))


def test_norm_examples():
    assert norm2(np.zeros(3)) == 0
    assert norm2(np.array([3.0, 4.0])) == 5
    assert norm2(np.array([1j, 1])) == pytest.approx(np.sqrt(2), rel=1e-15)


@given(complex_vec)
def test_norm_squared_matches_dot(v):
    v = np.array(v)
    n2 = norm2(v) ** 2
    d = dot_hermitian(v, v).real
    assert abs(n2 - d) <= 1e-14 * max(d, 1e-300)


def test_counters_for_dot_and_norm():
    c = OpCounter()
    dot_hermitian(np.ones(3), np.ones(3), c)
    norm2(np.ones(3), c)
    assert (c.dots, c.norms) == (1, 1)
    assert c.as_dict()["dots"] == 1


def test_work_dtype():
    assert work_dtype(np.ones(2)) == np.float64
    assert work_dtype(np.ones(2), np.ones(2, dtype=complex)) == np.complex128
    assert work_dtype(np.ones(2, dtype=np.int32)) == np.float64


def test_from_coo_sums_duplicates_and_sorts():
    A = CsrMatrix.from_coo((2, 3), [1, 0, 1, 0], [2, 1, 2, 0], [1.0, 2.0, 3.0, 4.0])
    np.testing.assert_array_equal(A.row_ptr, [0, 2, 3])
    np.testing.assert_array_equal(A.col_idx, [0, 1, 2])
    np.testing.assert_array_equal(A.values, [4.0, 2.0, 4.0])


def test_dense_round_trip_and_diagonal_positions():
    D = np.array([[1.0, 0, 2], [0, 0, 3], [4, 0, 5]])
    A = CsrMatrix.from_dense(D)
    np.testing.assert_array_equal(A.to_dense(), D)
    pos = A.diagonal_positions()
    assert pos[1] == -1
    assert A.values[pos[0]] == 1 and A.values[pos[2]] == 5
    assert A.same_structure(A.copy())


@pytest.mark.parametrize("row_ptr,col_idx", [
    ([1, 1, 2], [0, 1]),        # row_ptr[0] != 0
    ([0, 2, 1], [0, 1]),        # decreasing
    ([0, 1, 2], [0, 5]),        # column out of range
    ([0, 2, 2], [1, 0]),        # unsorted columns
    ([0, 2, 2], [1, 1]),        # repeated column
    ([0, 1, 3], [0, 1]),        # row_ptr[-1] != nnz
])
def test_invalid_csr(row_ptr, col_idx):
    with pytest.raises(ValueError):
        CsrMatrix((2, 2), row_ptr, col_idx, np.ones(len(col_idx)))


def test_matmul_operator():
    A, D = random_csr(3, 3, 1)
    v = np.ones(3)
    np.testing.assert_allclose(A @ v, D @ v)
