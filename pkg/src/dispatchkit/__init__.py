"""Least-cost, resilience and weighted dispatch of customer-owned generators
during supply shortage outages."""

__version__ = "0.1.0"

from .core import (
    BoundStatus,
    ConvergenceError,
    DispatchError,
    DispatchProblem,
    DispatchSolution,
    InfeasibleError,
    InputDomainError,
    ParetoPoint,
    ParticipatingCustomer,
    Regime,
    RegimeReport,
    classify_regime,
    evaluate_cost,
    inverse_marginal_cost,
    marginal_cost,
)
from .solver import (
    SolverConfig,
    relaxed_least_cost_is_minimum,
    scalarized_objective,
    solve_cost_dispatch,
    solve_multiobjective,
    solve_resilience_dispatch,
)
from .oracle import Clearing, brute_force_oracle
from .analysis import (
    SweepParameter,
    SweepResult,
    SweepSpec,
    closed_form_lambda_breakpoints,
    pareto_frontier,
    sweep_demand,
    sweep_lambda,
)
from .problem_io import load_problem, loads_problem, dumps_problem, reference_problem
