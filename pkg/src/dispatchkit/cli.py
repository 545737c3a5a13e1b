"""Command-line interface: ``dispatchkit {check,solve,sweep,pareto}``.

Exit statuses:

    0  success (``check``: demand can be met exactly)
    1  bad arguments or malformed problem file
    2  infeasible problem for the requested mode
    3  numerical failure (bisection or KKT check)
    4  ``check`` only: demand exceeds total capacity
    5  ``check`` only: demand is below the committed minimum
    6  output could not be written
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from . import __version__
from .analysis import (
    DEFAULT_DEMAND_STEP,
    DEFAULT_LAMBDA_STEP,
    SweepError,
    SweepParameter,
    SweepSpec,
    lambda_grid,
    pareto_frontier,
    sweep_demand,
    sweep_lambda,
)
from .core import ConvergenceError, DispatchProblem, InfeasibleError, InputDomainError, Regime, classify_regime
from .problem_io import (
    REFERENCE_FLEET,
    ProblemFileError,
    frontier_table,
    load_problem,
    solution_table,
    sweep_table,
    write_atomic,
)
from .solver import SolverConfig, solve_cost_dispatch, solve_multiobjective, solve_resilience_dispatch

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_INFEASIBLE = 2
EXIT_NUMERICAL = 3
EXIT_DEFICIT = 4
EXIT_BELOW_MINIMUM = 5
EXIT_IO = 6

_REGIME_NOTES = {
    Regime.EQUALITY_FEASIBLE: (
        "total capacity covers the demand and the committed minimum does not exceed it: "
        "the least-cost dispatch exists and is the global optimum"
    ),
    Regime.DEFICIT: (
        "demand exceeds total capacity: no dispatch clears the shortage, so the "
        "equality-constrained problem is empty; use --mode resilience or --mode multi"
    ),
    Regime.BELOW_MINIMUM: (
        "demand is below the sum of minimum commitments: no dispatch meets it "
        "without over-generating"
    ),
}
_REGIME_EXIT = {
    Regime.EQUALITY_FEASIBLE: EXIT_OK,
    Regime.DEFICIT: EXIT_DEFICIT,
    Regime.BELOW_MINIMUM: EXIT_BELOW_MINIMUM,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which would collide with EXIT_INFEASIBLE
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dispatchkit", description="Shortage-outage dispatch of customer generators.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_problem(p):
        p.add_argument("problem", help=f"problem file (TOML), or {REFERENCE_FLEET} for the bundled fleet")
        p.add_argument("--demand", type=float, help="override demand_kwh from the file")

    p = sub.add_parser("check", help="classify the demand against fleet capacity")
    add_problem(p)

    p = sub.add_parser("solve", help="solve one dispatch")
    add_problem(p)
    p.add_argument("--mode", choices=("cost", "resilience", "multi"), default="cost")
    p.add_argument("--lambda", dest="lam", type=float, help="override the cost weight (multi mode)")
    p.add_argument("--out", help="write the result table here instead of stdout")

    p = sub.add_parser("sweep", help="sweep lambda or demand and tabulate the dispatch")
    add_problem(p)
    p.add_argument("--param", choices=("lambda", "demand"), required=True)
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--lambda", dest="lam", type=float, help="override the cost weight (unused by demand sweeps)")
    p.add_argument("--out", help="result table path (default stdout)")
    p.add_argument("--plot", help="write an SVG figure here")

    p = sub.add_parser("pareto", help="trace the cost/energy frontier over lambda in [0, 1]")
    add_problem(p)
    p.add_argument("--grid-size", type=int, default=101, help="number of evenly spaced lambda values")
    p.add_argument("--out", help="frontier table path (default stdout)")
    p.add_argument("--plot", help="write an SVG cost-vs-energy figure here")
    return parser


def _load(args) -> DispatchProblem:
    problem = load_problem(args.problem)
    try:
        if args.demand is not None:
            problem = problem.with_demand(args.demand)
        if getattr(args, "lam", None) is not None:
            problem = problem.with_lambda(args.lam)
    except InputDomainError as exc:
        raise ProblemFileError(str(exc)) from None
    return problem


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        write_atomic(path, text)


def _cmd_check(args, cfg) -> int:
    problem = _load(args)
    report = classify_regime(problem)
    print(f"regime: {report.regime.value}")
    print(f"capacity_min_kwh: {report.capacity_min:.6f}")
    print(f"capacity_max_kwh: {report.capacity_max:.6f}")
    print(f"demand_kwh: {report.demand_e:.6f}")
    print(f"note: {_REGIME_NOTES[report.regime]}")
    return _REGIME_EXIT[report.regime]


_SOLVERS = {
    "cost": solve_cost_dispatch,
    "resilience": solve_resilience_dispatch,
    "multi": solve_multiobjective,
}


def _cmd_solve(args, cfg) -> int:
    problem = _load(args)
    sol = _SOLVERS[args.mode](problem, cfg)
    _emit(solution_table(problem.ids, sol), args.out)
    statuses = ",".join(f"{cid}={s.value}" for cid, s in zip(problem.ids, sol.bound_status))
    print(f"kkt_residual: {sol.kkt_residual:.3e}", file=sys.stderr)
    print(f"bound_status: {statuses}", file=sys.stderr)
    return EXIT_OK


def _cmd_sweep(args, cfg) -> int:
    problem = _load(args)
    if args.param == "lambda":
        spec = SweepSpec(
            SweepParameter.LAMBDA,
            0.0 if args.start is None else args.start,
            1.0 if args.stop is None else args.stop,
            DEFAULT_LAMBDA_STEP if args.step is None else args.step,
        )
        result = sweep_lambda(problem, spec, cfg)
    else:
        spec = SweepSpec(
            SweepParameter.DEMAND,
            problem.capacity_min if args.start is None else args.start,
            problem.capacity_max if args.stop is None else args.stop,
            DEFAULT_DEMAND_STEP if args.step is None else args.step,
        )
        result = sweep_demand(problem, spec, cfg)
    _emit(sweep_table(result), args.out)
    if args.plot:
        from .plotting import sweep_figure

        write_atomic(args.plot, sweep_figure(result))
    if result.breakpoints:
        joined = ", ".join(f"{b:g}" for b in result.breakpoints)
        print(f"breakpoints: {joined}", file=sys.stderr)
    return EXIT_OK


def _cmd_pareto(args, cfg) -> int:
    problem = _load(args)
    points = pareto_frontier(problem, lambda_grid(args.grid_size), cfg)
    _emit(frontier_table(points), args.out)
    if args.plot:
        from .plotting import frontier_figure

        write_atomic(args.plot, frontier_figure(points))
    return EXIT_OK


_COMMANDS = {"check": _cmd_check, "solve": _cmd_solve, "sweep": _cmd_sweep, "pareto": _cmd_pareto}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = SolverConfig.from_env()
        return _COMMANDS[args.command](args, cfg)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_PARSE
    except (ProblemFileError, InputDomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SweepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE if isinstance(exc.cause, InfeasibleError) else EXIT_NUMERICAL
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO


def run() -> None:
    sys.exit(main())
