"""``mlnsolve`` command line entry point.

Exit codes: 0 all solves converged, 2 iteration budget exhausted,
3 breakdown, 4 input error, 5 preconditioner failure.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .harness import (
    PRECONDITIONERS,
    SOLVERS,
    AdaptiveState,
    ExperimentSpec,
    exit_status,
    read_manifest,
    run_sequence,
    run_sweep,
    write_csv,
)
from .mmio import MatrixMarketError
from .precond import FactorizationError
from .sparse import DimensionMismatch

EXIT_INPUT = 4
EXIT_PRECOND = 5


def _n_list(text: str) -> list[int]:
    try:
        values = [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad n list {text!r}") from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("n values must be positive integers")
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mlnsolve",
        description="Sweep ML(n)BiCGStabt / ML(n)BiCG / BiCGStab over block sizes n "
                    "on a Matrix Market system and report E(n) and T_conv(n) as CSV.")
    p.add_argument("--matrix", help="coordinate Matrix Market file (.mtx or .mtx.gz)")
    rhs = p.add_mutually_exclusive_group()
    rhs.add_argument("--rhs", help="array Matrix Market right-hand side")
    rhs.add_argument("--rhs-ones", action="store_true", help="use b = A @ ones (default)")
    p.add_argument("--solver", choices=SOLVERS, default="mlbicgstabt")
    p.add_argument("--n", type=_n_list, action="extend", dest="n_list",
                   help="block sizes, comma or space separated (default 1)")
    p.add_argument("--precond", choices=PRECONDITIONERS, default="ilu0")
    p.add_argument("--retry-identity", action="store_true",
                   help="fall back to no preconditioning if ILU(0) hits a zero pivot")
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--max-it", type=int, default=None, help="iteration cap (default 3N)")
    p.add_argument("--kappa", type=float, default=0.0,
                   help="omega safeguard threshold in [0, 1); 0 is plain minimization")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shadow", default="residual-gauss",
                   choices=["residual-gauss", "residual-gauss-complex", "sign-gauss"])
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.add_argument("--sequence", help="manifest of systems to solve with adaptive n")
    p.add_argument("--step", type=int, default=1)
    p.add_argument("--n-min", type=int, default=1)
    p.add_argument("--n-max", type=int, default=64)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _spec(args, matrix, rhs) -> ExperimentSpec:
    return ExperimentSpec(
        matrix_path=matrix,
        rhs_path=rhs,
        solver=args.solver,
        n_list=args.n_list or [1],
        precond=args.precond,
        shadow=args.shadow.replace("-", "_"),
        tol=args.tol,
        max_it=args.max_it,
        kappa=args.kappa,
        seed=args.seed,
        retry_identity=args.retry_identity,
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    out = args.out if args.out is not None else sys.stdout
    try:
        if args.sequence:
            entries = read_manifest(args.sequence)
            specs = [_spec(args, m, r) for m, r in entries]
            n0 = specs[0].n_list[0]
            adaptive = AdaptiveState(n_current=n0, step=args.step,
                                     n_min=args.n_min, n_max=args.n_max)
            rows = run_sequence(specs, adaptive)
        else:
            if not args.matrix:
                parser.error("--matrix is required unless --sequence is given")
            rows = run_sweep(_spec(args, args.matrix, args.rhs))
        write_csv(rows, out)
    except FactorizationError as exc:
        print(f"mlnsolve: preconditioner failure: {exc} (try --precond none or "
              f"--retry-identity)", file=sys.stderr)
        return EXIT_PRECOND
    except (OSError, MatrixMarketError, DimensionMismatch, ValueError) as exc:
        print(f"mlnsolve: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return exit_status([r.flag for r in rows])


if __name__ == "__main__":
    sys.exit(main())
