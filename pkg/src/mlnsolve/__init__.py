"""ML(n)BiCGStab-family Krylov solvers for sparse non-symmetric systems."""
from .index_map import g_index, r_index
from .mmio import read_matrix_market, read_matrix_market_array, write_matrix_market
from .precond import IdentityPreconditioner, Ilu0Factors, ilu0_factorize
from .solvers import (
    SolverConfig,
    SolverReport,
    bicgstab,
    choose_omega,
    make_shadow_matrix,
    ml_n_bicg,
    ml_n_bicgstabt,
)
from .sparse import CsrMatrix, OpCounter, dot_hermitian, matvec, matvec_hermitian, norm2

__version__ = "0.1.0"
