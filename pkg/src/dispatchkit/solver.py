"""Dual-bisection solvers for the three dispatch problems.

Every problem here is separable across customers with a single coupling
constraint on total energy, so fixing the coupling price reduces it to N
independent clamped scalar problems. A bisection on that price recovers the
exact optimum without a general QP solver.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    BoundStatus,
    ConvergenceError,
    DispatchProblem,
    DispatchSolution,
    InfeasibleError,
    InputDomainError,
    Regime,
    classify_regime,
)

__all__ = [
    "SolverConfig",
    "solve_cost_dispatch",
    "solve_resilience_dispatch",
    "solve_multiobjective",
    "relaxed_least_cost_is_minimum",
    "scalarized_objective",
    "bound_status",
]

TOL_ENV_VAR = "DISPATCHKIT_TOL"
_BRACKET_EXPANSIONS = 8


@dataclass(frozen=True)
class SolverConfig:
    bisection_tol: float = 1e-9
    max_iters: int = 200
    kkt_tol: float = 1e-6

    def __post_init__(self):
        for name in ("bisection_tol", "kkt_tol"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InputDomainError(f"{name} must be a positive finite number, got {value}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise InputDomainError(f"max_iters must be an integer >= 1, got {self.max_iters}")

    @classmethod
    def from_env(cls, **overrides) -> "SolverConfig":
        """Defaults, with ``bisection_tol`` taken from ``DISPATCHKIT_TOL`` if set."""
        raw = os.environ.get(TOL_ENV_VAR)
        if raw is not None and "bisection_tol" not in overrides:
            try:
                overrides["bisection_tol"] = float(raw)
            except ValueError:
                raise InputDomainError(f"{TOL_ENV_VAR}={raw!r} is not a number") from None
        return cls(**overrides)


def bound_status(problem: DispatchProblem, energies: np.ndarray) -> tuple[BoundStatus, ...]:
    # clamped values equal the bounds exactly, so ties land on the bound
    out = []
    for e, lo, hi in zip(energies, problem.lower, problem.upper):
        if e <= lo:
            out.append(BoundStatus.AT_LOWER)
        elif e >= hi:
            out.append(BoundStatus.AT_UPPER)
        else:
            out.append(BoundStatus.INTERIOR)
    return tuple(out)


def _kkt_residual(gradient: np.ndarray, status: tuple[BoundStatus, ...]) -> float:
    """Worst stationarity violation of a minimisation over a box.

    ``gradient`` is the objective gradient plus the coupling multiplier term.
    At a lower bound it may be positive, at an upper bound negative.
    """
    worst = 0.0
    for g, s in zip(gradient, status):
        if s is BoundStatus.INTERIOR:
            v = abs(g)
        elif s is BoundStatus.AT_LOWER:
            v = max(0.0, -g)
        else:
            v = max(0.0, g)
        worst = max(worst, float(v))
    return worst


def scalarized_objective(problem: DispatchProblem, energies, lam: float | None = None) -> float:
    """``lam * total cost - (1 - lam) * total energy``."""
    lam = problem.lam if lam is None else lam
    energies = np.asarray(energies, dtype=float)
    return lam * problem.total_cost(energies) - (1.0 - lam) * math.fsum(energies)


def _bisect(
    residual: Callable[[float], float],
    lo: float,
    hi: float,
    cfg: SolverConfig,
    what: str,
) -> tuple[float, int]:
    """Root of a non-decreasing ``residual`` to within ``cfg.bisection_tol``.

    The bracket is widened (doubling its width) up to eight times if the
    residual does not change sign across it.
    """
    f_lo, f_hi = residual(lo), residual(hi)
    for _ in range(_BRACKET_EXPANSIONS):
        if f_lo <= cfg.bisection_tol and f_hi >= -cfg.bisection_tol:
            break
        width = hi - lo
        if f_lo > cfg.bisection_tol:
            lo -= width
            f_lo = residual(lo)
        if f_hi < -cfg.bisection_tol:
            hi += width
            f_hi = residual(hi)
    else:
        if not (f_lo <= cfg.bisection_tol and f_hi >= -cfg.bisection_tol):
            raise ConvergenceError(f"{what}: could not bracket the coupling price")

    if abs(f_lo) <= cfg.bisection_tol:
        return lo, 0
    if abs(f_hi) <= cfg.bisection_tol:
        return hi, 0
    for it in range(1, cfg.max_iters + 1):
        mid = 0.5 * (lo + hi)
        f_mid = residual(mid)
        if abs(f_mid) <= cfg.bisection_tol:
            return mid, it
        if mid in (lo, hi):
            break
        if f_mid < 0:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(
        f"{what}: bisection did not reach tolerance {cfg.bisection_tol} "
        f"within {cfg.max_iters} iterations"
    )


def _polish(problem: DispatchProblem, price: float, demand: float) -> float:
    """Solve for the price exactly on the active set found at ``price``.

    Keeps the original price unless the closed form clears the demand at
    least as well.
    """
    energies = problem.energies_at_price(price)
    free = (energies > problem.lower) & (energies < problem.upper)
    if not free.any():
        return price
    slope = problem.horizon_t / (2.0 * problem.c2[free])
    fixed = math.fsum(energies[~free])
    exact = (demand - fixed + math.fsum(slope * problem.c1[free])) / math.fsum(slope)
    before = abs(math.fsum(energies) - demand)
    after = abs(math.fsum(problem.energies_at_price(exact)) - demand)
    return exact if after <= before else price


def _finish(
    problem: DispatchProblem,
    energies: np.ndarray,
    multiplier: float,
    gradient: np.ndarray,
    cfg: SolverConfig,
    iterations: int,
) -> DispatchSolution:
    status = bound_status(problem, energies)
    kkt = _kkt_residual(gradient, status)
    if kkt > cfg.kkt_tol:
        raise ConvergenceError(f"KKT residual {kkt:.3e} exceeds kkt_tol {cfg.kkt_tol:.3e}")
    energies = np.array(energies, dtype=float)
    energies.flags.writeable = False
    return DispatchSolution(
        energies=energies,
        total_energy=float(math.fsum(energies)),
        total_cost=problem.total_cost(energies),
        coupling_multiplier=float(multiplier),
        bound_status=status,
        kkt_residual=kkt,
        iterations=iterations,
    )


def _raise_infeasible(problem: DispatchProblem, regime: Regime) -> None:
    if regime is Regime.DEFICIT:
        raise InfeasibleError(
            f"demand {problem.demand_e:g} kWh exceeds total capacity "
            f"T*sum(p_max) = {problem.capacity_max:g} kWh; no dispatch clears the shortage"
        )
    raise InfeasibleError(
        f"demand {problem.demand_e:g} kWh is below the committed minimum "
        f"T*sum(p_min) = {problem.capacity_min:g} kWh"
    )


def solve_cost_dispatch(problem: DispatchProblem, cfg: SolverConfig | None = None) -> DispatchSolution:
    """Least-cost dispatch that exactly meets the demand.

    Bisects on the shadow price of the demand constraint; interior customers
    end up at equal marginal cost, which is returned as
    ``coupling_multiplier``.

    Raises
    ------
    InfeasibleError
        If the demand is outside ``[T*sum(p_min), T*sum(p_max)]``.
    ConvergenceError
        If the bisection or the KKT check fails.
    """
    cfg = cfg or SolverConfig()
    regime = classify_regime(problem).regime
    if regime is not Regime.EQUALITY_FEASIBLE:
        _raise_infeasible(problem, regime)

    demand = problem.demand_e

    def residual(price: float) -> float:
        return math.fsum(problem.energies_at_price(price)) - demand

    lo = float(np.min(problem.c1))
    hi = float(np.max(problem.marginal_costs(problem.upper)))
    price, iters = _bisect(residual, lo, hi, cfg, "least-cost dispatch")
    price = _polish(problem, price, demand)
    energies = problem.energies_at_price(price)
    gradient = problem.marginal_costs(energies) - price
    return _finish(problem, energies, price, gradient, cfg, iters)


def solve_resilience_dispatch(
    problem: DispatchProblem, cfg: SolverConfig | None = None
) -> DispatchSolution:
    """Maximise delivered energy without exceeding the demand.

    In deficit every customer runs at its maximum. Otherwise the maximiser
    is not unique and the least-cost dispatch of the full demand is returned
    as the representative.
    """
    cfg = cfg or SolverConfig()
    regime = classify_regime(problem).regime
    if regime is Regime.BELOW_MINIMUM:
        _raise_infeasible(problem, regime)
    if regime is Regime.EQUALITY_FEASIBLE:
        return solve_cost_dispatch(problem, cfg)
    energies = problem.upper.copy()
    # maximising energy: gradient of -sum(e) is -1, multiplier of the slack constraint is 0
    gradient = np.full(problem.n, -1.0)
    return _finish(problem, energies, 0.0, gradient, cfg, 0)


def solve_multiobjective(problem: DispatchProblem, cfg: SolverConfig | None = None) -> DispatchSolution:
    """Minimise ``lam * cost - (1 - lam) * energy`` with total energy capped at the demand.

    ``coupling_multiplier`` is the multiplier of the cap, in the same units
    as the scalarised objective's gradient; zero when the cap is slack.
    """
    cfg = cfg or SolverConfig()
    lam = problem.lam
    if not 0 <= lam <= 1:
        raise InputDomainError(f"lambda must lie in [0, 1], got {lam}")
    if lam == 0:
        return solve_resilience_dispatch(problem, cfg)
    if problem.demand_e < problem.capacity_min:
        _raise_infeasible(problem, Regime.BELOW_MINIMUM)

    # Work in the stationary price (1 - lam - mu) / lam instead of mu itself:
    # for small lam a bisection in mu cannot resolve the price.
    def gradient(energies: np.ndarray, price: float) -> np.ndarray:
        # lam * mc - (1 - lam) + mu, rewritten without cancellation
        return lam * (problem.marginal_costs(energies) - price)

    free_price = (1.0 - lam) / lam
    energies = problem.energies_at_price(free_price)
    if math.fsum(energies) <= problem.demand_e:
        return _finish(problem, energies, 0.0, gradient(energies, free_price), cfg, 0)

    demand = problem.demand_e

    def residual(price: float) -> float:
        return math.fsum(problem.energies_at_price(price)) - demand

    # above the largest marginal cost at full output everyone is saturated
    hi = min(free_price, float(np.max(problem.marginal_costs(problem.upper))))
    lo = min(float(np.min(problem.c1)), hi)
    price, iters = _bisect(residual, lo, hi, cfg, "multi-objective dispatch")
    price = _polish(problem, price, demand)
    mu = max(0.0, (1.0 - lam) - lam * price)
    energies = problem.energies_at_price(price)
    return _finish(problem, energies, mu, gradient(energies, price), cfg, iters)


def relaxed_least_cost_is_minimum(problem: DispatchProblem, cfg: SolverConfig | None = None) -> bool:
    """True when pure least-cost dispatch under the relaxed cap sends every
    customer to its minimum commitment (to 1e-9 kWh)."""
    sol = solve_multiobjective(problem.with_lambda(1.0), cfg)
    return bool(np.all(np.abs(sol.energies - problem.lower) <= 1e-9))
