"""Experiment runner: parameter sweeps over n and adaptive-n sequences.

Protocol: x0 = 0, b read from file or built as ``A @ ones``, shadow matrix
``[r0, random columns]`` with a per-point seed ``seed ^ n``, ILU(0) or no
preconditioning. Solve times come from a monotonic clock wrapped around the
solver call only; matrix I/O, factorization and shadow construction are
excluded.
"""
from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .mmio import read_matrix_market, read_matrix_market_array
from .precond import FactorizationError, IdentityPreconditioner, ilu0_factorize
from .solvers import (
    BREAKDOWN,
    CONVERGED,
    SolverConfig,
    bicgstab,
    make_shadow_matrix,
    ml_n_bicg,
    ml_n_bicgstabt,
)
from .sparse import CsrMatrix, DimensionMismatch, matvec

log = logging.getLogger(__name__)

SOLVERS = ("mlbicgstabt", "mlbicg", "bicgstab")
PRECONDITIONERS = ("ilu0", "none")

CSV_HEADER = ("solver", "n", "flag", "iter", "err", "true_err", "seconds",
              "matvecs", "hermitian_matvecs", "precond_applies", "dots")
SEQUENCE_HEADER = ("system", "matrix", "n", "flag", "iter", "err", "true_err", "seconds")

Clock = Callable[[], float]


@dataclass
class ExperimentSpec:
    matrix_path: str | Path
    rhs_path: str | Path | None = None  # None: b = A @ ones
    solver: str = "mlbicgstabt"
    n_list: Sequence[int] = (1,)
    precond: str = "ilu0"
    shadow: str = "residual_gauss"
    tol: float = 1e-7
    max_it: int | None = None  # None: 3 N
    kappa: float = 0.0
    breakdown_eps: float = 0.0
    seed: int = 0
    output_path: str | Path | None = None
    retry_identity: bool = False

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.precond not in PRECONDITIONERS:
            raise ValueError(f"unknown preconditioner {self.precond!r}")
        self.n_list = [int(n) for n in self.n_list]
        if not self.n_list or min(self.n_list) < 1:
            raise ValueError("n_list must be a nonempty list of positive integers")

    def config(self, n: int, N: int) -> SolverConfig:
        return SolverConfig(n=n, tol=self.tol, max_it=self.max_it or 3 * N,
                            kappa=self.kappa, breakdown_eps=self.breakdown_eps,
                            seed=self.seed ^ n)


@dataclass
class SweepRow:
    solver: str
    n: int
    flag: int
    iter: int
    err: float
    true_err: float
    seconds: float
    matvecs: int
    hermitian_matvecs: int
    precond_applies: int
    dots: int


@dataclass
class SequenceRow:
    system: int
    matrix: str
    n: int
    flag: int
    iter: int
    err: float
    true_err: float
    seconds: float


@dataclass
class AdaptiveState:
    """Block-size controller for a sequence of related systems.

    After each solve, ``t1`` is the previous system's time and ``t2`` the
    current one. If the previous solve was slower (``t1 > t2``), n grows by
    ``step``; otherwise it shrinks by ``step``. n is clamped to
    ``[n_min, n_max]``; the first solve leaves n unchanged.
    """

    n_current: int
    step: int = 1
    n_min: int = 1
    n_max: int = 64
    t1: float | None = None
    t2: float | None = None
    trajectory: list[int] = field(default_factory=list)

    def __post_init__(self):
        if self.step < 1:
            raise ValueError("step must be a positive integer")
        if not 1 <= self.n_min <= self.n_current <= self.n_max:
            raise ValueError("need 1 <= n_min <= n_current <= n_max")
        if not self.trajectory:
            self.trajectory.append(self.n_current)

    def update(self, elapsed: float) -> int:
        """Record the time of the solve just finished and return the next n."""
        self.t1, self.t2 = self.t2, elapsed
        if self.t1 is not None:
            if self.t1 > self.t2:
                self.n_current = min(self.n_current + self.step, self.n_max)
            else:
                self.n_current = max(self.n_current - self.step, self.n_min)
        self.trajectory.append(self.n_current)
        return self.n_current


def build_rhs(A: CsrMatrix, source=None) -> np.ndarray:
    """``A @ ones`` when ``source`` is None or ``"ones"``, else read an array file."""
    N = A.shape[0]
    if source is None or source == "ones":
        return matvec(A, np.ones(A.shape[1]))
    b = read_matrix_market_array(source)
    if b.shape != (N,):
        raise DimensionMismatch(f"rhs has {b.size} entries, matrix has {N} rows")
    return b


def build_preconditioner(A: CsrMatrix, kind: str, retry_identity: bool = False):
    if kind == "none":
        return IdentityPreconditioner(A.shape[0])
    try:
        return ilu0_factorize(A)
    except FactorizationError as exc:
        if not retry_identity:
            raise
        log.warning("ILU(0) failed (%s); falling back to no preconditioning", exc)
        return IdentityPreconditioner(A.shape[0])


def solve_point(A, b, M, solver: str, n: int, cfg: SolverConfig,
                shadow: str = "residual_gauss", clock: Clock = time.perf_counter):
    """Run one solver at block size ``n`` from x0 = 0; return ``(x, report, seconds)``."""
    if solver == "bicgstab":
        t = clock()
        x, rep = bicgstab(A, b, M=M, config=cfg)
        return x, rep, clock() - t
    # x0 = 0, so r0 = b
    Q = make_shadow_matrix(b, n, shadow, cfg.seed)
    t = clock()
    if solver == "mlbicgstabt":
        x, rep = ml_n_bicgstabt(A, b, Q=Q, M=M, config=cfg)
    else:
        x, rep = ml_n_bicg(A, b, Q=Q, config=cfg)
    return x, rep, clock() - t


def run_sweep(spec: ExperimentSpec, clock: Clock = time.perf_counter,
              system: tuple[CsrMatrix, np.ndarray] | None = None) -> list[SweepRow]:
    """Solve once per n in ``spec.n_list`` and write the CSV if requested.

    ``system`` short-circuits file loading with an in-memory ``(A, b)``.
    """
    if system is None:
        A, _ = read_matrix_market(spec.matrix_path)
        b = build_rhs(A, spec.rhs_path)
    else:
        A, b = system
    M = build_preconditioner(A, spec.precond, spec.retry_identity)
    rows = []
    for n in spec.n_list:
        cfg = spec.config(n, A.shape[0])
        _, rep, seconds = solve_point(A, b, M, spec.solver, n, cfg, spec.shadow, clock)
        c = rep.counters
        rows.append(SweepRow(spec.solver, n, rep.flag, rep.iter, rep.err, rep.true_err,
                             seconds, c.matvecs, c.hermitian_matvecs, c.precond_applies,
                             c.dots))
        log.info("%s n=%d flag=%d iter=%d err=%.3e true_err=%.3e %.3fs", spec.solver, n,
                 rep.flag, rep.iter, rep.err, rep.true_err, seconds)
    if spec.output_path is not None:
        write_csv(rows, spec.output_path)
    return rows


def run_sequence(specs: Sequence[ExperimentSpec], adaptive: AdaptiveState,
                 output_path=None, clock: Clock = time.perf_counter,
                 systems: Sequence[tuple[CsrMatrix, np.ndarray]] | None = None
                 ) -> list[SequenceRow]:
    """Solve a sequence of systems, adapting n between solves.

    Each spec supplies the system and solver settings; its ``n_list`` is
    ignored in favour of ``adaptive.n_current``.
    """
    if len(specs) < 2:
        raise ValueError("a sequence needs at least two systems")
    rows = []
    for idx, spec in enumerate(specs):
        if systems is None:
            A, _ = read_matrix_market(spec.matrix_path)
            b = build_rhs(A, spec.rhs_path)
        else:
            A, b = systems[idx]
        M = build_preconditioner(A, spec.precond, spec.retry_identity)
        n = adaptive.n_current
        cfg = spec.config(n, A.shape[0])
        _, rep, seconds = solve_point(A, b, M, spec.solver, n, cfg, spec.shadow, clock)
        rows.append(SequenceRow(idx, str(spec.matrix_path), n, rep.flag, rep.iter, rep.err,
                                rep.true_err, seconds))
        adaptive.update(seconds)
    if output_path is not None:
        write_csv(rows, output_path)
    return rows


def _cell(value):
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(rows, path_or_file) -> None:
    """Write dataclass rows with floats at 17 significant digits."""
    if not rows:
        raise ValueError("no rows to write")
    header = [f.name for f in fields(rows[0])]
    if isinstance(path_or_file, io.TextIOBase):
        _write_rows(path_or_file, header, rows)
        return
    with open(path_or_file, "w", newline="") as fh:
        _write_rows(fh, header, rows)


def _write_rows(fh, header, rows):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in asdict(row).values()])


def read_manifest(path) -> list[tuple[Path, Path | None]]:
    """Parse a sequence manifest: one ``matrix.mtx [rhs.mtx]`` per line.

    Blank lines and ``#`` comments are skipped; relative paths are resolved
    against the manifest's directory.
    """
    path = Path(path)
    entries = []
    for line in path.read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) > 2:
            raise ValueError(f"{path}: bad manifest line {line!r}")
        mat = (path.parent / parts[0]).resolve()
        rhs = (path.parent / parts[1]).resolve() if len(parts) == 2 else None
        entries.append((mat, rhs))
    return entries


def exit_status(flags: Sequence[int]) -> int:
    """0 if every solve converged, 3 if any broke down, otherwise 2."""
    if all(f == CONVERGED for f in flags):
        return 0
    if any(f == BREAKDOWN for f in flags):
        return 3
    return 2
