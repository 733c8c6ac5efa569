"""Random test systems shared by the test modules."""
import numpy as np

from mlnsolve.sparse import CsrMatrix


def diag_dominant(N, seed, density=0.1, complex_=False, margin=1.0):
    """Sparse strictly row diagonally dominant matrix with a full diagonal."""
    rng = np.random.default_rng(seed)
    mask = rng.random((N, N)) < density
    D = np.where(mask, rng.standard_normal((N, N)), 0.0)
    if complex_:
        D = D + 1j * np.where(mask, rng.standard_normal((N, N)), 0.0)
    np.fill_diagonal(D, 0)
    rowsum = np.abs(D).sum(axis=1)
    np.fill_diagonal(D, rowsum + margin)
    return CsrMatrix.from_dense(D), D


def rhs(N, seed, complex_=False):
    rng = np.random.default_rng(seed + 10_000)
    b = rng.standard_normal(N)
    if complex_:
        b = b + 1j * rng.standard_normal(N)
    return b


def random_pattern_matrix(N, seed, density=0.2, complex_=False):
    """Random sparsity pattern with a stored, dominant diagonal."""
    return diag_dominant(N, seed, density=density, complex_=complex_, margin=0.5)


def clustered_nonsymmetric(N, seed, centers=(1.0, 2.0, 4.0), spread=1e-4):
    """Dense nonsymmetric matrix S diag(lam) S^{-1} with clustered eigenvalues."""
    rng = np.random.default_rng(seed)
    S = np.eye(N) + 0.3 * rng.standard_normal((N, N)) / np.sqrt(N)
    lam = np.asarray(centers)[rng.integers(0, len(centers), N)]
    lam = lam + spread * rng.standard_normal(N)
    D = S @ np.diag(lam) @ np.linalg.inv(S)
    return CsrMatrix.from_dense(D), D


def shifted_random(N, seed, shift=3.0):
    """Dense nonsymmetric ``shift*I + randn/sqrt(N)``."""
    rng = np.random.default_rng(seed)
    D = shift * np.eye(N) + rng.standard_normal((N, N)) / np.sqrt(N)
    return CsrMatrix.from_dense(D), D


def gershgorin_dominant(N, seed, density=0.1, radius=0.5, diag=(1.0, 2.0), complex_=False):
    """Sparse matrix whose Gershgorin discs are ``|z - d_i| <= radius * d_i``.

    Diagonal entries are uniform on ``diag``; every nonempty row has its
    off-diagonal absolute sum scaled to exactly ``radius`` times the diagonal.
    """
    rng = np.random.default_rng(seed)
    mask = rng.random((N, N)) < density
    np.fill_diagonal(mask, False)
    E = np.where(mask, rng.standard_normal((N, N)), 0.0)
    if complex_:
        E = E + 1j * np.where(mask, rng.standard_normal((N, N)), 0.0)
    d = rng.uniform(*diag, N)
    rowsum = np.abs(E).sum(axis=1)
    rowsum[rowsum == 0] = 1.0
    D = E * (radius * d / rowsum)[:, None]
    np.fill_diagonal(D, d)
    return CsrMatrix.from_dense(D), D


def sparse_dominant(N, seed, per_row=5):
    """Large sparse diagonally dominant matrix built directly in COO form."""
    rng = np.random.default_rng(seed)
    rows = np.repeat(np.arange(N), per_row)
    cols = rng.integers(0, N, N * per_row)
    keep = rows != cols
    rows, cols = rows[keep], cols[keep]
    vals = rng.standard_normal(rows.size)
    diag = np.bincount(rows, weights=np.abs(vals), minlength=N) + 1.0
    return CsrMatrix.from_coo((N, N), np.concatenate([rows, np.arange(N)]),
                              np.concatenate([cols, np.arange(N)]), np.concatenate([vals, diag]))
