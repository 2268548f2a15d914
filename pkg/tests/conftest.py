import pytest

from digicontrol.plant import ContinuousPlant, discretize

# Acceptance verdicts collected by test_acceptance.py, reported at the end.
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def plant():
    return discretize(ContinuousPlant(-10.0), 100.0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
