import pytest

from qoverlap.model import sinusoidal_model

_CRITERIA: list[tuple[str, bool, str]] = []


@pytest.fixture
def record_criterion():
    """Record one acceptance line; printed in the terminal summary."""
    def record(name: str, passed: bool, detail: str = "") -> None:
        _CRITERIA.append((name, bool(passed), detail))
    return record


@pytest.fixture
def table1_row1():
    return sinusoidal_model(0.5, 0.3, lam=1.0, n=30, rho=0.8, mu=1.0)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
