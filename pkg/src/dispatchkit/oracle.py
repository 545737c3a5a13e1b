"""Exhaustive grid-search reference solver for small fleets.

Shares nothing with the bisection solvers beyond the cost model, so it can
be used to check them.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .core import DispatchProblem, DispatchSolution, InfeasibleError, InputDomainError
from .solver import bound_status

__all__ = ["Clearing", "brute_force_oracle", "customer_grid", "MAX_ORACLE_CUSTOMERS", "MAX_ORACLE_POINTS"]

MAX_ORACLE_CUSTOMERS = 4
MAX_ORACLE_POINTS = 10**8


class Clearing(str, enum.Enum):
    EQUALITY = "equality"
    RELAXED = "relaxed"


def customer_grid(lo: float, hi: float, resolution: float) -> np.ndarray:
    """Uniform grid from ``lo`` in steps of ``resolution``, always ending at ``hi``."""
    steps = math.floor((hi - lo) / resolution + 1e-9)
    grid = lo + resolution * np.arange(steps + 1)
    if hi - grid[-1] > 1e-9 * max(1.0, abs(hi)):
        grid = np.append(grid, hi)
    else:
        grid[-1] = hi
    return grid


def brute_force_oracle(
    problem: DispatchProblem,
    resolution: float,
    constraint: Clearing | str = Clearing.EQUALITY,
) -> DispatchSolution:
    """Best grid point of the dispatch problem by enumeration.

    Every customer but the last is enumerated on its grid. In equality mode
    the last customer takes up the remainder exactly, so each candidate
    meets the demand with no rounding, and is kept if that remainder lies
    inside its box. In relaxed mode the last customer's best grid value
    under the remaining budget is read off a running minimum of its
    objective term, which gives the same answer as enumerating its axis.

    Equality mode minimises total cost; relaxed mode minimises
    ``lam * cost - (1 - lam) * energy`` with total energy capped at the
    demand. The returned solution carries no dual information
    (``coupling_multiplier`` and ``kkt_residual`` are NaN).

    Raises
    ------
    InputDomainError
        More than four customers, a non-positive resolution, or more than
        1e8 enumerated combinations.
    InfeasibleError
        No grid point satisfies the constraints.
    """
    constraint = Clearing(constraint)
    if not (math.isfinite(resolution) and resolution > 0):
        raise InputDomainError(f"resolution must be > 0, got {resolution}")
    if problem.n > MAX_ORACLE_CUSTOMERS:
        raise InputDomainError(
            f"oracle supports at most {MAX_ORACLE_CUSTOMERS} customers, got {problem.n}"
        )
    grids = [customer_grid(lo, hi, resolution) for lo, hi in zip(problem.lower, problem.upper)]
    enumerated = math.prod(len(g) for g in grids[:-1])
    if enumerated > MAX_ORACLE_POINTS:
        raise InputDomainError(
            f"grid has {enumerated:.3g} combinations, above the {MAX_ORACLE_POINTS:.0e} limit"
        )

    t = problem.horizon_t
    lam = problem.lam
    demand = problem.demand_e

    def term(i: int, e: np.ndarray) -> np.ndarray:
        p = e / t
        cost = t * (problem.c2[i] * p * p + problem.c1[i] * p + problem.c0[i])
        if constraint is Clearing.EQUALITY:
            return cost
        return lam * cost - (1.0 - lam) * e

    last = problem.n - 1
    lo_last, hi_last = problem.lower[last], problem.upper[last]
    last_grid = grids[last]
    last_terms = term(last, last_grid)
    running_min = np.minimum.accumulate(last_terms)
    # index of the value achieving each running minimum
    running_arg = np.zeros(len(last_terms), dtype=int)
    for k in range(1, len(last_terms)):
        running_arg[k] = k if last_terms[k] < running_min[k - 1] else running_arg[k - 1]

    head_terms = [term(i, g) for i, g in enumerate(grids[:-1])]
    best_value = math.inf
    best_point = None

    # outer loop over the first axis keeps memory bounded
    outer = grids[0] if last > 0 else np.array([np.nan])
    for j, first in enumerate(outer):
        if last > 0:
            axes = [np.array([first])] + grids[1:-1]
            axis_terms = [head_terms[0][j : j + 1]] + head_terms[1:]
            mesh = np.meshgrid(*axes, indexing="ij")
            tmesh = np.meshgrid(*axis_terms, indexing="ij")
            partial_e = np.stack([m.ravel() for m in mesh], axis=1)
            partial_sum = partial_e.sum(axis=1)
            partial_obj = sum(m.ravel() for m in tmesh)
        else:
            partial_e = np.zeros((1, 0))
            partial_sum = np.zeros(1)
            partial_obj = np.zeros(1)

        remainder = demand - partial_sum
        if constraint is Clearing.EQUALITY:
            ok = (remainder >= lo_last - 1e-9) & (remainder <= hi_last + 1e-9)
            if not ok.any():
                continue
            e_last = np.clip(remainder[ok], lo_last, hi_last)
            total = partial_obj[ok] + term(last, e_last)
            k = int(np.argmin(total))
            value = total[k]
            point = np.append(partial_e[ok][k], e_last[k])
        else:
            idx = np.searchsorted(last_grid, remainder + 1e-9, side="right") - 1
            ok = idx >= 0
            if not ok.any():
                continue
            total = partial_obj[ok] + running_min[idx[ok]]
            k = int(np.argmin(total))
            value = total[k]
            point = np.append(partial_e[ok][k], last_grid[running_arg[idx[ok][k]]])
        if value < best_value:
            best_value = value
            best_point = point

    if best_point is None:
        raise InfeasibleError(f"no grid point at resolution {resolution} satisfies the {constraint.value} constraint")

    energies = np.asarray(best_point, dtype=float)
    energies.flags.writeable = False
    return DispatchSolution(
        energies=energies,
        total_energy=float(math.fsum(energies)),
        total_cost=problem.total_cost(energies),
        coupling_multiplier=math.nan,
        bound_status=bound_status(problem, energies),
        kkt_residual=math.nan,
    )
