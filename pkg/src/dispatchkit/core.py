"""Domain types and the quadratic generator cost model.

Energies are in kWh, powers in kW, durations in hours. Costs carry no
currency and are reported in "cost-units".
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Sequence

import numpy as np

__all__ = [
    "DispatchError",
    "InputDomainError",
    "InfeasibleError",
    "ConvergenceError",
    "BoundStatus",
    "Regime",
    "ParticipatingCustomer",
    "DispatchProblem",
    "DispatchSolution",
    "RegimeReport",
    "ParetoPoint",
    "evaluate_cost",
    "marginal_cost",
    "inverse_marginal_cost",
    "classify_regime",
]


class DispatchError(Exception):
    """Base class for all dispatchkit errors."""


class InputDomainError(DispatchError, ValueError):
    """An argument is outside the domain an operation accepts."""


class InfeasibleError(DispatchError):
    """The requested dispatch problem has an empty feasible set."""


class ConvergenceError(DispatchError, ArithmeticError):
    """A numerical routine failed to reach its tolerance."""


class BoundStatus(str, enum.Enum):
    AT_LOWER = "AtLower"
    INTERIOR = "Interior"
    AT_UPPER = "AtUpper"


class Regime(str, enum.Enum):
    BELOW_MINIMUM = "BelowMinimum"
    EQUALITY_FEASIBLE = "EqualityFeasible"
    DEFICIT = "Deficit"


def _finite(name: str, value: float) -> float:
    if isinstance(value, bool):
        raise InputDomainError(f"{name} must be a number, got bool")
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise InputDomainError(f"{name} must be a number, got {value!r}") from None
    if not math.isfinite(value):
        raise InputDomainError(f"{name} must be finite, got {value}")
    return value


@dataclass(frozen=True)
class ParticipatingCustomer:
    """One contracted generator.

    The cost coefficients are the fused products of the technology
    coefficient and the unit price, so the hourly cost at average power
    ``p`` is ``c2 * p**2 + c1 * p + c0``.
    """

    id: str
    p_min: float
    p_max: float
    c0: float
    c1: float
    c2: float

    def __post_init__(self):
        for name in ("p_min", "p_max", "c0", "c1", "c2"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        if not 0 < self.p_min < self.p_max:
            raise InputDomainError(
                f"customer {self.id!r}: need 0 < p_min < p_max, "
                f"got p_min={self.p_min}, p_max={self.p_max}"
            )
        if self.c2 <= 0:
            raise InputDomainError(f"customer {self.id!r}: c2 must be > 0, got {self.c2}")
        if self.c1 < 0:
            raise InputDomainError(f"customer {self.id!r}: c1 must be >= 0, got {self.c1}")


@dataclass(frozen=True)
class DispatchProblem:
    """A fleet of customers asked to cover a shortage of ``demand_e`` kWh
    over ``horizon_t`` hours. ``lam`` weights cost against delivered energy
    (1 is pure least cost, 0 pure resilience)."""

    customers: tuple[ParticipatingCustomer, ...]
    horizon_t: float
    demand_e: float
    lam: float = 0.5

    def __post_init__(self):
        customers = tuple(self.customers)
        object.__setattr__(self, "customers", customers)
        if not customers:
            raise InputDomainError("problem needs at least one customer")
        for c in customers:
            if not isinstance(c, ParticipatingCustomer):
                raise InputDomainError(f"expected ParticipatingCustomer, got {type(c).__name__}")
        ids = [c.id for c in customers]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise InputDomainError(f"duplicate customer ids: {dupes}")
        horizon = _finite("horizon_t", self.horizon_t)
        demand = _finite("demand_e", self.demand_e)
        lam = _finite("lambda", self.lam)
        if horizon <= 0:
            raise InputDomainError(f"horizon_t must be > 0, got {horizon}")
        if demand < 0:
            raise InputDomainError(f"demand_e must be >= 0, got {demand}")
        if not 0 <= lam <= 1:
            raise InputDomainError(f"lambda must lie in [0, 1], got {lam}")
        object.__setattr__(self, "horizon_t", horizon)
        object.__setattr__(self, "demand_e", demand)
        object.__setattr__(self, "lam", lam)

    @property
    def n(self) -> int:
        return len(self.customers)

    @property
    def ids(self) -> list[str]:
        return [c.id for c in self.customers]

    def _column(self, name: str) -> np.ndarray:
        arr = np.array([getattr(c, name) for c in self.customers], dtype=float)
        arr.flags.writeable = False
        return arr

    @cached_property
    def c0(self) -> np.ndarray:
        return self._column("c0")

    @cached_property
    def c1(self) -> np.ndarray:
        return self._column("c1")

    @cached_property
    def c2(self) -> np.ndarray:
        return self._column("c2")

    @cached_property
    def lower(self) -> np.ndarray:
        """Per-customer minimum energy, ``T * p_min``."""
        arr = self.horizon_t * self._column("p_min")
        arr.flags.writeable = False
        return arr

    @cached_property
    def upper(self) -> np.ndarray:
        """Per-customer maximum energy, ``T * p_max``."""
        arr = self.horizon_t * self._column("p_max")
        arr.flags.writeable = False
        return arr

    @property
    def capacity_min(self) -> float:
        return float(math.fsum(self.lower))

    @property
    def capacity_max(self) -> float:
        return float(math.fsum(self.upper))

    def costs(self, energies) -> np.ndarray:
        """Vectorised per-customer cost of ``energies``."""
        p = np.asarray(energies, dtype=float) / self.horizon_t
        return self.horizon_t * (self.c2 * p * p + self.c1 * p + self.c0)

    def marginal_costs(self, energies) -> np.ndarray:
        p = np.asarray(energies, dtype=float) / self.horizon_t
        return 2.0 * self.c2 * p + self.c1

    def energies_at_price(self, price: float) -> np.ndarray:
        """Energies at which every marginal cost equals ``price``, clamped to the box."""
        with np.errstate(over="ignore", invalid="ignore"):
            raw = self.horizon_t * (price - self.c1) / (2.0 * self.c2)
        return np.clip(raw, self.lower, self.upper)

    def total_cost(self, energies) -> float:
        return float(math.fsum(self.costs(energies)))

    def with_demand(self, demand_e: float) -> "DispatchProblem":
        return replace(self, demand_e=demand_e)

    def with_lambda(self, lam: float) -> "DispatchProblem":
        return replace(self, lam=lam)

    def permuted(self, order: Sequence[int]) -> "DispatchProblem":
        return replace(self, customers=tuple(self.customers[i] for i in order))


@dataclass(frozen=True, eq=False)
class DispatchSolution:
    energies: np.ndarray
    total_energy: float
    total_cost: float
    coupling_multiplier: float
    bound_status: tuple[BoundStatus, ...]
    kkt_residual: float
    iterations: int = 0

    def as_dict(self, ids: Sequence[str]) -> dict[str, float]:
        return dict(zip(ids, (float(e) for e in self.energies)))


@dataclass(frozen=True)
class RegimeReport:
    regime: Regime
    capacity_max: float
    capacity_min: float
    demand_e: float

    @property
    def equality_feasible(self) -> bool:
        return self.regime is Regime.EQUALITY_FEASIBLE


@dataclass(frozen=True, eq=False)
class ParetoPoint:
    """A sampled point of the cost/energy trade-off.

    When consecutive grid values produce the same outcome they are merged
    and ``lambda_end`` records the last weight of the run.
    """

    lam: float
    total_cost: float
    total_energy: float
    energies: np.ndarray = field(repr=False)
    lambda_end: float | None = None

    def __post_init__(self):
        if self.lambda_end is None:
            object.__setattr__(self, "lambda_end", self.lam)


def _check_energy_args(e: float, t: float) -> tuple[float, float]:
    e = _finite("energy", e)
    t = _finite("horizon", t)
    if e < 0:
        raise InputDomainError(f"energy must be >= 0, got {e}")
    if t <= 0:
        raise InputDomainError(f"horizon must be > 0, got {t}")
    return e, t


def evaluate_cost(pc: ParticipatingCustomer, e: float, t: float) -> float:
    """Cost of generating ``e`` kWh spread evenly over ``t`` hours."""
    e, t = _check_energy_args(e, t)
    p = e / t
    return t * (pc.c2 * p * p + pc.c1 * p + pc.c0)


def marginal_cost(pc: ParticipatingCustomer, e: float, t: float) -> float:
    """Derivative of :func:`evaluate_cost` with respect to energy."""
    e, t = _check_energy_args(e, t)
    return 2.0 * pc.c2 * (e / t) + pc.c1


def inverse_marginal_cost(pc: ParticipatingCustomer, price: float, t: float) -> float:
    """Energy whose marginal cost equals ``price``, clamped to ``[t*p_min, t*p_max]``."""
    price = _finite("price", price)
    t = _finite("horizon", t)
    if t <= 0:
        raise InputDomainError(f"horizon must be > 0, got {t}")
    e = t * (price - pc.c1) / (2.0 * pc.c2)
    return min(max(e, t * pc.p_min), t * pc.p_max)


def classify_regime(problem: DispatchProblem) -> RegimeReport:
    cap_min = problem.capacity_min
    cap_max = problem.capacity_max
    demand = problem.demand_e
    if cap_max < demand:
        regime = Regime.DEFICIT
    elif demand < cap_min:
        regime = Regime.BELOW_MINIMUM
    else:
        regime = Regime.EQUALITY_FEASIBLE
    return RegimeReport(regime, cap_max, cap_min, demand)
