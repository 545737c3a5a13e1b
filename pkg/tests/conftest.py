import os

from hypothesis import settings
import pytest

from dispatchkit import DispatchProblem, ParticipatingCustomer, reference_problem

_ACCEPTANCE = []


@pytest.fixture
def fleet() -> DispatchProblem:
    """The bundled five-customer fleet (T = 1 h, demand 700 kWh)."""
    return reference_problem()


@pytest.fixture
def pc1(fleet) -> ParticipatingCustomer:
    return fleet.customers[0]


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _ACCEPTANCE.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")


settings.register_profile("stress", max_examples=2000, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))
