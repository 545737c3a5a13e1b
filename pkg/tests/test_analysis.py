import numpy as np
import pytest
from hypothesis import given, settings

from dispatchkit import BoundStatus, InputDomainError, SweepParameter, SweepSpec, pareto_frontier
from dispatchkit.analysis import (
    SweepError,
    closed_form_lambda_breakpoints,
    lambda_grid,
    segment_affine_residual,
    sweep_demand,
    sweep_lambda,
)

from strategies import problems

UPPER = [60.0, 100.0, 125.0, 85.0, 130.0]


def _thresholds(fleet):
    # weight at which lam * mc = 1 - lam at each bound
    out = {}
    for c in fleet.customers:
        leave_max = 1.0 / (1.0 + c.c1 + 2 * c.c2 * c.p_max)
        reach_min = 1.0 / (1.0 + c.c1 + 2 * c.c2 * c.p_min)
        out[c.id] = (leave_max, reach_min)
    return out


@pytest.fixture(scope="module")
def lambda_sweep():
    from dispatchkit import reference_problem

    return sweep_lambda(reference_problem(), SweepSpec(SweepParameter.LAMBDA, 0.0, 1.0, 0.001))


@pytest.fixture(scope="module")
def demand_sweep():
    from dispatchkit import reference_problem

    return sweep_demand(reference_problem(), SweepSpec(SweepParameter.DEMAND, 150.0, 500.0, 10.0))


def test_spec_grid():
    spec = SweepSpec(SweepParameter.LAMBDA, 0.0, 1.0, 0.001)
    v = spec.values()
    assert len(v) == 1001 and v[0] == 0.0 and v[-1] == 1.0
    assert v[48] == 0.048
    assert len(SweepSpec(SweepParameter.DEMAND, 150.0, 500.0, 10.0).values()) == 36


@pytest.mark.parametrize(
    "args",
    [("lambda", 0.0, 1.0, 0.0), ("lambda", 0.5, 0.2, 0.1), ("lambda", 0.0, 1.5, 0.1), ("demand", 0, 1, -1)],
)
def test_spec_validation(args):
    with pytest.raises(InputDomainError):
        SweepSpec(*args)


def test_wrong_parameter_rejected(fleet):
    with pytest.raises(InputDomainError):
        sweep_lambda(fleet, SweepSpec("demand", 150, 500, 10))
    with pytest.raises(InputDomainError):
        sweep_demand(fleet, SweepSpec("lambda", 0, 1, 0.1))


def test_lambda_plateaus(lambda_sweep):
    for row in lambda_sweep.rows:
        if row.value <= 0.048:
            np.testing.assert_array_equal(row.energies, UPPER)
        if row.value >= 0.091:
            np.testing.assert_array_equal(row.energies, 30.0)


def test_first_breakpoint_is_pc5(lambda_sweep, fleet):
    first = lambda_sweep.changes[0]
    assert first.customer_id == "PC5"
    assert first.before is BoundStatus.AT_UPPER
    leave = {cid: v[0] for cid, v in _thresholds(fleet).items()}
    # the lowest leave-max weight is the first to be crossed as lam rises
    assert min(leave, key=leave.get) == "PC5"


def test_breakpoints_match_closed_form(lambda_sweep, fleet):
    step = 0.001
    for cid, (leave_max, reach_min) in _thresholds(fleet).items():
        left = lambda_sweep.first_change(cid, BoundStatus.AT_UPPER)
        reached = next(
            c.value for c in lambda_sweep.changes if c.customer_id == cid and c.after is BoundStatus.AT_LOWER
        )
        assert leave_max <= left <= leave_max + step + 1e-12
        assert reach_min <= reached <= reach_min + step + 1e-12


def test_library_closed_form_agrees(fleet):
    ours = _thresholds(fleet)
    lib = closed_form_lambda_breakpoints(fleet)
    for cid in ours:
        assert lib[cid] == pytest.approx(ours[cid], rel=1e-12)


def test_lambda_totals_non_increasing(lambda_sweep):
    e = np.array([r.total_energy for r in lambda_sweep.rows])
    c = np.array([r.total_cost for r in lambda_sweep.rows])
    assert np.all(np.diff(e) <= 1e-9)
    assert np.all(np.diff(c) <= 1e-6)


def test_lambda_segments_affine_in_price(lambda_sweep):
    # interior energies are affine in (1 - lam) / lam, not in lam
    rows = [r for r in lambda_sweep.rows if r.value > 0]
    from dispatchkit.analysis import SweepResult

    trimmed = SweepResult(lambda_sweep.parameter, lambda_sweep.ids, tuple(rows))
    assert segment_affine_residual(trimmed, transform=lambda x: (1 - x) / x) <= 1e-6


def test_demand_rows(demand_sweep):
    assert len(demand_sweep.rows) == 36
    np.testing.assert_allclose(demand_sweep.rows[0].energies, 30.0, atol=1e-9)
    np.testing.assert_allclose(demand_sweep.rows[-1].energies, UPPER, atol=1e-9)
    for r in demand_sweep.rows:
        assert abs(r.total_energy - r.value) <= 1e-9
    assert np.all(np.diff(demand_sweep.energies, axis=0) >= -1e-9)


def test_demand_piecewise_affine(demand_sweep):
    assert segment_affine_residual(demand_sweep) <= 1e-6


def test_demand_saturation_speeds_up_others(demand_sweep):
    # once PC1 saturates the remaining customers pick up its share
    e = demand_sweep.energies
    sat = demand_sweep.first_change("PC1", BoundStatus.INTERIOR)
    k = list(demand_sweep.values).index(sat)
    before = e[k - 1, 1:] - e[k - 2, 1:]
    after = e[k + 2, 1:] - e[k + 1, 1:]
    assert np.all(after > before)


def test_demand_outside_range_names_point(fleet):
    with pytest.raises(SweepError) as err:
        sweep_demand(fleet, SweepSpec(SweepParameter.DEMAND, 140.0, 200.0, 10.0))
    assert err.value.value == 140.0
    with pytest.raises(SweepError) as err:
        sweep_demand(fleet, SweepSpec(SweepParameter.DEMAND, 480.0, 520.0, 10.0))
    assert err.value.value == 510.0


def test_frontier_extremes(fleet):
    pts = pareto_frontier(fleet, [1.0, 0.0, 0.5], collapse=False)
    assert [p.lam for p in pts] == [0.0, 0.5, 1.0]
    assert pts[0].total_energy == 500.0
    assert pts[-1].total_energy == 150.0
    assert pts[0].total_cost >= pts[-1].total_cost
    # 0.5 and 1.0 both sit at the minimum, so they merge
    merged = pareto_frontier(fleet, [1.0, 0.0, 0.5])
    assert [(p.lam, p.lambda_end) for p in merged] == [(0.0, 0.0), (0.5, 1.0)]


def test_frontier_plateaus(fleet):
    pts = pareto_frontier(fleet, lambda_grid(101))
    assert pts[0].total_energy == 500.0 and pts[-1].total_energy == 150.0
    assert pts[0].lam == 0.0 and pts[0].lambda_end == 0.04
    assert pts[-1].lam == 0.1 and pts[-1].lambda_end == 1.0
    middle = pts[1:-1]
    assert [p.lam for p in middle] == [0.05, 0.06, 0.07, 0.08, 0.09]
    e = [p.total_energy for p in pts]
    assert all(a > b for a, b in zip(e, e[1:]))
    uncollapsed = pareto_frontier(fleet, lambda_grid(101), collapse=False)
    assert len(uncollapsed) == 101


def test_frontier_rejects_bad_weights(fleet):
    with pytest.raises(InputDomainError):
        pareto_frontier(fleet, [0.0, 1.2])
    with pytest.raises(InputDomainError):
        lambda_grid(1)


@settings(max_examples=25, deadline=None)
@given(problems(max_n=4, regime="relaxed"))
def test_frontier_non_dominated(problem):
    pts = pareto_frontier(problem, lambda_grid(21))
    for a in pts:
        for b in pts:
            assert not (b.total_cost < a.total_cost - 1e-6 and b.total_energy > a.total_energy + 1e-9)


@settings(max_examples=25, deadline=None)
@given(problems(max_n=4, regime="equality"))
def test_random_demand_sweep_affine(problem):
    spec = SweepSpec(SweepParameter.DEMAND, problem.capacity_min, problem.capacity_max,
                     (problem.capacity_max - problem.capacity_min) / 40)
    try:
        res = sweep_demand(problem, spec)
    except SweepError:
        # last grid value can overshoot capacity by rounding
        return
    assert segment_affine_residual(res) <= 1e-6 * max(1.0, problem.capacity_max)
