"""Problem files (TOML) and result tables (CSV).

A problem file looks like::

    horizon_h = 1.0
    demand_kwh = 700.0
    lambda = 0.5            # optional

    [[customers]]
    id = "PC1"
    p_min_kw = 30.0
    p_max_kw = 60.0
    c0 = 96.6               # cost-units per hour
    c1 = 7.588              # cost-units per kWh
    c2 = 0.0414             # cost-units * h / kWh^2
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .core import DispatchError, DispatchProblem, DispatchSolution, InputDomainError, ParetoPoint, ParticipatingCustomer
from .analysis import SweepResult

__all__ = [
    "ProblemFileError",
    "REFERENCE_FLEET",
    "load_problem",
    "loads_problem",
    "dumps_problem",
    "reference_problem",
    "solution_table",
    "sweep_table",
    "frontier_table",
    "write_atomic",
]

REFERENCE_FLEET = "builtin:reference"
DEFAULT_LAMBDA = 0.5

_TOP_FIELDS = {"horizon_h", "demand_kwh", "lambda", "customers"}
_CUSTOMER_FIELDS = ("id", "p_min_kw", "p_max_kw", "c0", "c1", "c2")


class ProblemFileError(DispatchError, ValueError):
    """Malformed problem file; the message starts with the offending field path or line."""


def _number(doc: Mapping[str, Any], key: str, path: str) -> float:
    if key not in doc:
        raise ProblemFileError(f"{path}{key}: missing required field")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ProblemFileError(f"{path}{key}: expected a number, got {type(v).__name__}")
    return float(v)


def _reject_unknown(doc: Mapping[str, Any], allowed, path: str) -> None:
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        raise ProblemFileError(f"{path}{unknown[0]}: unknown field")


def loads_problem(text: str, source: str = "<string>") -> DispatchProblem:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ProblemFileError(f"{source}: {exc}") from None

    _reject_unknown(doc, _TOP_FIELDS, "")
    horizon = _number(doc, "horizon_h", "")
    demand = _number(doc, "demand_kwh", "")
    lam = _number(doc, "lambda", "") if "lambda" in doc else DEFAULT_LAMBDA

    raw_customers = doc.get("customers")
    if not isinstance(raw_customers, list) or not raw_customers:
        raise ProblemFileError("customers: expected a non-empty array of tables")
    customers = []
    for i, entry in enumerate(raw_customers):
        path = f"customers[{i}]."
        if not isinstance(entry, dict):
            raise ProblemFileError(f"customers[{i}]: expected a table")
        _reject_unknown(entry, _CUSTOMER_FIELDS, path)
        if "id" not in entry:
            raise ProblemFileError(f"{path}id: missing required field")
        cid = entry["id"]
        if not isinstance(cid, str) or not cid:
            raise ProblemFileError(f"{path}id: expected a non-empty string")
        values = {k: _number(entry, k, path) for k in _CUSTOMER_FIELDS[1:]}
        try:
            customers.append(
                ParticipatingCustomer(
                    id=cid,
                    p_min=values["p_min_kw"],
                    p_max=values["p_max_kw"],
                    c0=values["c0"],
                    c1=values["c1"],
                    c2=values["c2"],
                )
            )
        except InputDomainError as exc:
            raise ProblemFileError(f"customers[{i}]: {exc}") from None
    try:
        return DispatchProblem(tuple(customers), horizon, demand, lam)
    except InputDomainError as exc:
        raise ProblemFileError(str(exc)) from None


def load_problem(path: str | os.PathLike) -> DispatchProblem:
    """Read a problem file; ``builtin:reference`` names the bundled five-customer fleet."""
    if str(path) == REFERENCE_FLEET:
        return reference_problem()
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemFileError(f"{p}: cannot read ({exc.strerror})") from None
    return loads_problem(text, str(p))


def reference_problem() -> DispatchProblem:
    text = resources.files("dispatchkit").joinpath("data/reference_fleet.toml").read_text(encoding="utf-8")
    return loads_problem(text, REFERENCE_FLEET)


def _toml_float(x: float) -> str:
    s = repr(float(x))
    return s if ("." in s or "e" in s) else s + ".0"


def dumps_problem(problem: DispatchProblem) -> str:
    lines = [
        f"horizon_h = {_toml_float(problem.horizon_t)}",
        f"demand_kwh = {_toml_float(problem.demand_e)}",
        f"lambda = {_toml_float(problem.lam)}",
    ]
    for c in problem.customers:
        lines += [
            "",
            "[[customers]]",
            f"id = {json.dumps(c.id)}",
            f"p_min_kw = {_toml_float(c.p_min)}",
            f"p_max_kw = {_toml_float(c.p_max)}",
            f"c0 = {_toml_float(c.c0)}",
            f"c1 = {_toml_float(c.c1)}",
            f"c2 = {_toml_float(c.c2)}",
        ]
    return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _render(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _solution_cells(sol: DispatchSolution) -> list[str]:
    return [_fmt(e) for e in sol.energies] + [
        _fmt(sol.total_energy),
        _fmt(sol.total_cost),
        _fmt(sol.coupling_multiplier),
    ]


_TAIL = ["total_energy_kwh", "total_cost", "coupling_multiplier"]


def solution_table(ids: Sequence[str], sol: DispatchSolution) -> str:
    return _render(list(ids) + _TAIL, [_solution_cells(sol)])


def sweep_table(result: SweepResult) -> str:
    name = "lambda" if result.parameter.value == "lambda" else "demand_kwh"
    rows = [[_fmt(r.value)] + _solution_cells(r.solution) for r in result.rows]
    return _render([name] + list(result.ids) + _TAIL, rows)


def frontier_table(points: Sequence[ParetoPoint]) -> str:
    rows = [[_fmt(p.lam), _fmt(p.lambda_end), _fmt(p.total_cost), _fmt(p.total_energy)] for p in points]
    return _render(["lambda", "lambda_end", "total_cost", "total_energy_kwh"], rows)


def write_atomic(path: str | os.PathLike, data: str | bytes) -> None:
    """Write to a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": ""})) as fh:
            fh.write(data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
