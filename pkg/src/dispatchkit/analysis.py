"""Parameter sweeps and Pareto frontier construction."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import (
    BoundStatus,
    DispatchError,
    DispatchProblem,
    DispatchSolution,
    InfeasibleError,
    InputDomainError,
    ParetoPoint,
    Regime,
    classify_regime,
)
from .solver import SolverConfig, solve_cost_dispatch, solve_multiobjective

__all__ = [
    "SweepParameter",
    "SweepSpec",
    "SweepRow",
    "StatusChange",
    "SweepResult",
    "SweepError",
    "sweep_lambda",
    "sweep_demand",
    "pareto_frontier",
    "lambda_grid",
    "closed_form_lambda_breakpoints",
    "segment_affine_residual",
]

DEFAULT_LAMBDA_STEP = 0.001
DEFAULT_DEMAND_STEP = 10.0


class SweepParameter(str, enum.Enum):
    LAMBDA = "lambda"
    DEMAND = "demand"


class SweepError(DispatchError):
    """A sweep point failed; ``value`` is the offending parameter value."""

    def __init__(self, value: float, cause: DispatchError):
        super().__init__(f"sweep failed at {value:g}: {cause}")
        self.value = value
        self.cause = cause


@dataclass(frozen=True)
class SweepSpec:
    parameter: SweepParameter
    start: float
    stop: float
    step: float

    def __post_init__(self):
        object.__setattr__(self, "parameter", SweepParameter(self.parameter))
        for name in ("start", "stop", "step"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise InputDomainError(f"sweep {name} must be finite, got {v}")
            object.__setattr__(self, name, v)
        if self.step <= 0:
            raise InputDomainError(f"sweep step must be > 0, got {self.step}")
        if self.start > self.stop:
            raise InputDomainError(f"sweep start {self.start} is after stop {self.stop}")
        if self.parameter is SweepParameter.LAMBDA and not (0 <= self.start and self.stop <= 1):
            raise InputDomainError(f"lambda sweep must stay inside [0, 1], got [{self.start}, {self.stop}]")

    def values(self) -> np.ndarray:
        """Grid ``start + k*step`` up to ``stop`` inclusive, rounded to 12 decimals
        so that e.g. ``0.048`` is represented as the literal ``0.048``."""
        n = math.floor((self.stop - self.start) / self.step + 1e-9)
        vals = np.round(self.start + self.step * np.arange(n + 1), 12)
        return np.minimum(vals, self.stop)


@dataclass(frozen=True, eq=False)
class SweepRow:
    value: float
    solution: DispatchSolution

    @property
    def energies(self) -> np.ndarray:
        return self.solution.energies

    @property
    def total_cost(self) -> float:
        return self.solution.total_cost

    @property
    def total_energy(self) -> float:
        return self.solution.total_energy


@dataclass(frozen=True)
class StatusChange:
    value: float
    customer_id: str
    before: BoundStatus
    after: BoundStatus


@dataclass(frozen=True, eq=False)
class SweepResult:
    parameter: SweepParameter
    ids: tuple[str, ...]
    rows: tuple[SweepRow, ...]
    changes: tuple[StatusChange, ...] = field(default=())

    @property
    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.rows])

    @property
    def energies(self) -> np.ndarray:
        """Row-by-customer matrix of dispatched energies."""
        return np.array([r.energies for r in self.rows]).reshape(len(self.rows), len(self.ids))

    @property
    def breakpoints(self) -> list[float]:
        out: list[float] = []
        for c in self.changes:
            if not out or out[-1] != c.value:
                out.append(c.value)
        return out

    def first_change(self, customer_id: str, before: BoundStatus | None = None) -> float | None:
        for c in self.changes:
            if c.customer_id == customer_id and (before is None or c.before is before):
                return c.value
        return None


def _status_changes(ids: Sequence[str], rows: Sequence[SweepRow]) -> tuple[StatusChange, ...]:
    changes = []
    for prev, row in zip(rows, rows[1:]):
        for cid, a, b in zip(ids, prev.solution.bound_status, row.solution.bound_status):
            if a is not b:
                changes.append(StatusChange(row.value, cid, a, b))
    return tuple(changes)


def _run(
    problem: DispatchProblem,
    parameter: SweepParameter,
    values: Iterable[float],
    solve: Callable[[float], DispatchSolution],
) -> SweepResult:
    rows = []
    for v in values:
        v = float(v)
        try:
            rows.append(SweepRow(v, solve(v)))
        except SweepError:
            raise
        except DispatchError as exc:
            raise SweepError(v, exc) from exc
    rows = tuple(rows)
    ids = tuple(problem.ids)
    return SweepResult(parameter, ids, rows, _status_changes(ids, rows))


def sweep_lambda(problem: DispatchProblem, spec: SweepSpec, cfg: SolverConfig | None = None) -> SweepResult:
    """Multi-objective dispatch at each weight of ``spec`` with the demand held fixed."""
    if spec.parameter is not SweepParameter.LAMBDA:
        raise InputDomainError(f"sweep_lambda needs a lambda spec, got {spec.parameter.value}")
    cfg = cfg or SolverConfig()
    return _run(
        problem,
        SweepParameter.LAMBDA,
        spec.values(),
        lambda lam: solve_multiobjective(problem.with_lambda(lam), cfg),
    )


def sweep_demand(problem: DispatchProblem, spec: SweepSpec, cfg: SolverConfig | None = None) -> SweepResult:
    """Least-cost dispatch at each demand of ``spec``.

    Every grid point must lie in ``[T*sum(p_min), T*sum(p_max)]``; the first
    one that does not raises :class:`SweepError` naming it.
    """
    if spec.parameter is not SweepParameter.DEMAND:
        raise InputDomainError(f"sweep_demand needs a demand spec, got {spec.parameter.value}")
    cfg = cfg or SolverConfig()

    def solve(demand: float) -> DispatchSolution:
        p = problem.with_demand(demand)
        regime = classify_regime(p).regime
        if regime is not Regime.EQUALITY_FEASIBLE:
            raise InfeasibleError(
                f"demand {demand:g} kWh is outside [{p.capacity_min:g}, {p.capacity_max:g}] kWh ({regime.value})"
            )
        return solve_cost_dispatch(p, cfg)

    return _run(problem, SweepParameter.DEMAND, spec.values(), solve)


def lambda_grid(points: int) -> np.ndarray:
    if points < 2:
        raise InputDomainError(f"frontier needs at least 2 grid points, got {points}")
    return np.round(np.linspace(0.0, 1.0, points), 12)


def pareto_frontier(
    problem: DispatchProblem,
    lambdas: Sequence[float],
    cfg: SolverConfig | None = None,
    collapse: bool = True,
) -> list[ParetoPoint]:
    """Sample the cost/energy trade-off at the given weights.

    Points come back sorted by weight. With ``collapse`` set, consecutive
    weights giving the same cost and energy are merged into one point whose
    ``lam``/``lambda_end`` span the run.
    """
    cfg = cfg or SolverConfig()
    grid = sorted(float(x) for x in lambdas)
    for lam in grid:
        if not 0 <= lam <= 1:
            raise InputDomainError(f"frontier weights must lie in [0, 1], got {lam}")
    points: list[ParetoPoint] = []
    for lam in grid:
        sol = solve_multiobjective(problem.with_lambda(lam), cfg)
        if (
            collapse
            and points
            and math.isclose(points[-1].total_cost, sol.total_cost, rel_tol=0, abs_tol=1e-9)
            and math.isclose(points[-1].total_energy, sol.total_energy, rel_tol=0, abs_tol=1e-9)
        ):
            prev = points[-1]
            points[-1] = ParetoPoint(prev.lam, prev.total_cost, prev.total_energy, prev.energies, lam)
            continue
        points.append(ParetoPoint(lam, sol.total_cost, sol.total_energy, sol.energies))
    return points


def closed_form_lambda_breakpoints(problem: DispatchProblem) -> dict[str, tuple[float, float]]:
    """Per customer, the weight at which it leaves its maximum and the weight
    at which it reaches its minimum, when the energy cap is slack.

    A customer sits at its bound when ``lam * marginal_cost`` at that bound
    equals ``1 - lam``, i.e. ``lam = 1 / (1 + marginal_cost)``.
    """
    mc_hi = problem.marginal_costs(problem.upper)
    mc_lo = problem.marginal_costs(problem.lower)
    return {
        cid: (1.0 / (1.0 + hi), 1.0 / (1.0 + lo))
        for cid, hi, lo in zip(problem.ids, mc_hi, mc_lo)
    }


def segment_affine_residual(
    result: SweepResult,
    transform: Callable[[np.ndarray], np.ndarray] | None = None,
) -> float:
    """Largest least-squares residual of an affine fit of each customer's
    energy against the swept parameter, over runs of rows that share the
    same bound statuses.

    ``transform`` maps parameter values before fitting; for lambda sweeps the
    interior energies are affine in ``(1 - lam) / lam`` rather than ``lam``.
    """
    rows = result.rows
    worst = 0.0
    start = 0
    for end in range(1, len(rows) + 1):
        if end < len(rows) and rows[end].solution.bound_status == rows[start].solution.bound_status:
            continue
        seg = rows[start:end]
        start = end
        if len(seg) < 3:
            continue
        x = np.array([r.value for r in seg])
        if transform is not None:
            x = transform(x)
        design = np.column_stack([x, np.ones_like(x)])
        y = np.array([r.energies for r in seg])
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        worst = max(worst, float(np.max(np.abs(design @ coef - y))))
    return worst
