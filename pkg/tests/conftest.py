import numpy as np
import pytest

from mlnsolve.precond import ilu0_factorize
from mlnsolve.solvers import SolverConfig, bicgstab, ml_n_bicg, ml_n_bicgstabt
from mlnsolve.sparse import CsrMatrix

from reporting import LINES as ACCEPTANCE_LINES


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile every kernel signature once so timed tests measure the solvers."""
    for dtype in (np.float64, np.complex128):
        D = np.array([[4.0, 1.0], [1.0, 3.0]], dtype=dtype)
        A = CsrMatrix.from_dense(D)
        b = np.array([1.0, 2.0], dtype=dtype)
        M = ilu0_factorize(A)
        for n in (1, 2):
            ml_n_bicgstabt(A, b, M=M, config=SolverConfig(n=n))
            ml_n_bicgstabt(A, b, config=SolverConfig(n=n, kappa=0.7))
            ml_n_bicg(A, b, config=SolverConfig(n=n))
        bicgstab(A, b, M=M)
        M.solve_hermitian(b)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
